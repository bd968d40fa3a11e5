//! Residual a posteriori error estimators.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::forms::{Integration, QuadratureRule};
use crate::mesh::{Patches, Point, Triangulation};
use crate::morley_space::{cofactor, sym_mul, MorleyFunction};
use crate::operators::{face_jump, nodal_interpolate, JumpQuantity, P1Function};

/// κ_T = min{1, h_T/ε}.
pub fn kappa(h: f64, eps: f64) -> Result<f64> {
    if !(h > 0.0 && eps > 0.0) {
        return Err(Error::InvalidParameter(format!("kappa needs positive h and eps, got h={h}, eps={eps}")));
    }
    Ok((h / eps).min(1.0))
}

/// Per-triangle estimator contributions (not squared).
#[derive(Debug, Clone, Default)]
pub struct EstimatorBreakdown {
    pub mu_nc: Vec<f64>,
    pub mu_ih: Vec<f64>,
    pub eta_f: Vec<f64>,
    pub eta_1: Vec<f64>,
    pub eta_2: Vec<f64>,
    pub osc: Vec<f64>,
}

/// Global values √(Σ_T ·²) of each contribution.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EstimatorTotals {
    pub eta: f64,
    pub mu_nc: f64,
    pub mu_ih: f64,
    pub eta_f: f64,
    pub eta_1: f64,
    pub eta_2: f64,
    pub osc: f64,
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl EstimatorBreakdown {
    pub fn len(&self) -> usize {
        self.mu_nc.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu_nc.is_empty()
    }

    /// η(T)².
    pub fn local_squared(&self, t: usize) -> f64 {
        self.mu_nc[t].powi(2) + self.mu_ih[t].powi(2) + self.eta_f[t].powi(2) + self.eta_1[t].powi(2) + self.eta_2[t].powi(2)
    }

    pub fn local(&self, t: usize) -> f64 {
        self.local_squared(t).sqrt()
    }

    /// η(T)² for every triangle, the marking indicators.
    pub fn indicators(&self) -> Vec<f64> {
        (0..self.len()).map(|t| self.local_squared(t)).collect()
    }

    pub fn eta(&self) -> f64 {
        (0..self.len()).map(|t| self.local_squared(t)).sum::<f64>().sqrt()
    }

    pub fn totals(&self) -> EstimatorTotals {
        EstimatorTotals {
            eta: self.eta(),
            mu_nc: l2(&self.mu_nc),
            mu_ih: l2(&self.mu_ih),
            eta_f: l2(&self.eta_f),
            eta_1: l2(&self.eta_1),
            eta_2: l2(&self.eta_2),
            osc: l2(&self.osc),
        }
    }
}

/// ∥∇(u_h − I_h u_h)∥²_T; the integrand is quadratic, so a degree-2 rule is exact.
fn interpolation_gradient_sq(u: &MorleyFunction, p1: &P1Function, t: usize, rule: &QuadratureRule) -> f64 {
    let mesh = u.space().mesh();
    let [a, b, c] = mesh.coords(t);
    let gi = p1.gradient(t);
    let two_area = 2.0 * mesh.area(t);
    rule.points
        .iter()
        .zip(&rule.weights)
        .map(|(q, w)| {
            let x = [
                a[0] + q[0] * (b[0] - a[0]) + q[1] * (c[0] - a[0]),
                a[1] + q[0] * (b[1] - a[1]) + q[1] * (c[1] - a[1]),
            ];
            let g = u.local_jet(t, x).1;
            w * two_area * ((g[0] - gi[0]).powi(2) + (g[1] - gi[1]).powi(2))
        })
        .sum()
}

/// (∥f∥²_T, ∥f − Π₀f∥²_T) by quadrature.
fn load_norms(mesh: &Triangulation, f: &(dyn Fn(Point) -> f64 + Sync), t: usize, integration: &Integration) -> (f64, f64) {
    let pts = integration.points(mesh, t);
    let vals: Vec<f64> = pts.iter().map(|(x, _)| f(*x)).collect();
    let area: f64 = pts.iter().map(|(_, w)| w).sum();
    let mean = pts.iter().zip(&vals).map(|((_, w), v)| w * v).sum::<f64>() / area;
    let norm_sq = pts.iter().zip(&vals).map(|((_, w), v)| w * v * v).sum();
    let osc_sq = pts.iter().zip(&vals).map(|((_, w), v)| w * (v - mean).powi(2)).sum();
    (norm_sq, osc_sq)
}

fn patch_sum(patches: &Patches, local_sq: &[f64]) -> Vec<f64> {
    patches
        .element
        .iter()
        .map(|patch| patch.iter().map(|&s| local_sq[s]).sum::<f64>().sqrt())
        .collect()
}

/// ε-dependent oscillation ∥min{h, h²/ε}(f − Π₀f)∥_{L²(ω_T)} per triangle.
pub fn oscillation_eps(f: &(dyn Fn(Point) -> f64 + Sync), mesh: &Triangulation, eps: f64, integration: &Integration) -> Vec<f64> {
    let local: Vec<f64> = (0..mesh.num_triangles())
        .into_par_iter()
        .map(|t| {
            let h = mesh.diameter(t);
            let weight = h.min(h * h / eps);
            weight * weight * load_norms(mesh, f, t, integration).1
        })
        .collect();
    patch_sum(&Patches::new(mesh), &local)
}

/// Estimator of the singularly perturbed biharmonic problem.
pub fn estimate_biharmonic(
    u: &MorleyFunction,
    eps: f64,
    f: &(dyn Fn(Point) -> f64 + Sync),
    integration: &Integration,
) -> Result<EstimatorBreakdown> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be positive, got {eps}")));
    }
    let mesh = u.space().mesh();
    let p1 = nodal_interpolate(u);
    let face_terms: Vec<(f64, f64, f64)> = (0..mesh.num_faces())
        .into_par_iter()
        .map(|f| {
            let grad = face_jump(f, JumpQuantity::Gradient(u)).l2_norm_squared();
            if mesh.face(f).is_boundary() {
                (grad, 0.0, 0.0)
            } else {
                (
                    grad,
                    face_jump(f, JumpQuantity::HessianNormal(u)).l2_norm_squared(),
                    face_jump(f, JumpQuantity::P1GradientNormal(&p1)).l2_norm_squared(),
                )
            }
        })
        .collect();
    let rule = QuadratureRule::triangle(2);
    let per_triangle: Vec<[f64; 5]> = (0..mesh.num_triangles())
        .into_par_iter()
        .map(|t| {
            let h = mesh.diameter(t);
            let k = (h / eps).min(1.0);
            let (mut nc, mut e1, mut e2) = (0.0, 0.0, 0.0);
            for f in mesh.triangle_faces(t) {
                let (g, hn, pn) = face_terms[f];
                nc += eps / k * g;
                e1 += eps.powi(3) * k * hn;
                e2 += h * k * k * pn;
            }
            let ih = interpolation_gradient_sq(u, &p1, t, &rule);
            let ef = (h * k).powi(2) * load_norms(mesh, f, t, integration).0;
            [nc.sqrt(), ih.sqrt(), ef.sqrt(), e1.sqrt(), e2.sqrt()]
        })
        .collect();
    let mut out = unpack(&per_triangle);
    out.osc = oscillation_eps(f, mesh, eps, integration);
    Ok(out)
}

fn unpack(rows: &[[f64; 5]]) -> EstimatorBreakdown {
    EstimatorBreakdown {
        mu_nc: rows.iter().map(|r| r[0]).collect(),
        mu_ih: rows.iter().map(|r| r[1]).collect(),
        eta_f: rows.iter().map(|r| r[2]).collect(),
        eta_1: rows.iter().map(|r| r[3]).collect(),
        eta_2: rows.iter().map(|r| r[4]).collect(),
        osc: Vec::new(),
    }
}

/// Piecewise-constant edge fluxes A₁ = cof(D²ψ₁)∇I_hψ₂ + cof(D²ψ₂)∇I_hψ₁ and
/// A₂ = cof(D²ψ₁)∇I_hψ₁ on triangle `t`.
pub fn vk_fluxes(psi1: &MorleyFunction, psi2: &MorleyFunction, p1: &[P1Function; 2], t: usize) -> [[f64; 2]; 2] {
    let (c1, c2) = (cofactor(psi1.hessian(t)), cofactor(psi2.hessian(t)));
    let (g1, g2) = (p1[0].gradient(t), p1[1].gradient(t));
    let a = sym_mul(c1, g2);
    let b = sym_mul(c2, g1);
    [[a[0] + b[0], a[1] + b[1]], sym_mul(c1, g1)]
}

/// Estimator of the von Kármán problem; `loads` are (f₁, f₂).
pub fn estimate_vk(
    psi1: &MorleyFunction,
    psi2: &MorleyFunction,
    loads: [&(dyn Fn(Point) -> f64 + Sync); 2],
    integration: &Integration,
) -> Result<EstimatorBreakdown> {
    let mesh = psi1.space().mesh();
    let p1 = [nodal_interpolate(psi1), nodal_interpolate(psi2)];
    let fluxes: Vec<[[f64; 2]; 2]> = (0..mesh.num_triangles())
        .into_par_iter()
        .map(|t| vk_fluxes(psi1, psi2, &p1, t))
        .collect();
    let face_terms: Vec<(f64, f64, f64)> = (0..mesh.num_faces())
        .into_par_iter()
        .map(|f| {
            let grad = face_jump(f, JumpQuantity::Gradient(psi1)).l2_norm_squared()
                + face_jump(f, JumpQuantity::Gradient(psi2)).l2_norm_squared();
            let face = mesh.face(f);
            match face.minus {
                None => (grad, 0.0, 0.0),
                Some(m) => {
                    let nu = mesh.face_normal(f);
                    let len = mesh.face_length(f);
                    let jump = |j: usize| {
                        let (a, b) = (fluxes[face.plus][j], fluxes[m][j]);
                        let v = (a[0] - b[0]) * nu[0] + (a[1] - b[1]) * nu[1];
                        v * v * len
                    };
                    (grad, jump(0), jump(1))
                }
            }
        })
        .collect();
    let rule = QuadratureRule::triangle(2);
    let per_triangle: Vec<([f64; 5], f64)> = (0..mesh.num_triangles())
        .into_par_iter()
        .map(|t| {
            let h = mesh.diameter(t);
            let (mut nc, mut e1, mut e2) = (0.0, 0.0, 0.0);
            for f in mesh.triangle_faces(t) {
                let (g, a1, a2) = face_terms[f];
                nc += g / h;
                e1 += h.powi(3) * a1;
                e2 += h.powi(3) * a2;
            }
            let ih = interpolation_gradient_sq(psi1, &p1[0], t, &rule) + interpolation_gradient_sq(psi2, &p1[1], t, &rule);
            let (n1, o1) = load_norms(mesh, loads[0], t, integration);
            let (n2, o2) = load_norms(mesh, loads[1], t, integration);
            let h4 = h.powi(4);
            ([nc.sqrt(), ih.sqrt(), (h4 * (n1 + n2)).sqrt(), e1.sqrt(), e2.sqrt()], h4 * (o1 + o2))
        })
        .collect();
    let rows: Vec<[f64; 5]> = per_triangle.iter().map(|r| r.0).collect();
    let osc_local: Vec<f64> = per_triangle.iter().map(|r| r.1).collect();
    let mut out = unpack(&rows);
    out.osc = patch_sum(&Patches::new(mesh), &osc_local);
    Ok(out)
}
