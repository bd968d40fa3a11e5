//! Benchmark problems with exact solutions, and error norms.

pub mod jet;

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::forms::{Field, Integration, Singularity};
use crate::mesh::{Point, Triangulation};
use crate::morley_space::{MorleyFunction, Sym2};
use crate::operators::nodal_interpolate;
pub use jet::{bracket, Jet4};

/// Exact solution component: its order-4 jet at a point.
pub type ExactFn = Arc<dyn Fn(Point) -> Result<Jet4> + Send + Sync>;

#[derive(Clone)]
pub enum ProblemKind {
    /// ε²Δ²u − Δu = f.
    Biharmonic { eps: f64, load: Field },
    /// Δ²ψ₁ − [ψ₁, ψ₂] = f₁ and Δ²ψ₂ + ½[ψ₁, ψ₁] = f₂.
    VonKarman { loads: [Field; 2] },
}

#[derive(Clone)]
pub struct ProblemSpec {
    pub label: String,
    pub kind: ProblemKind,
    /// One entry per solution component.
    pub exact: Option<Vec<ExactFn>>,
    pub initial_mesh: Triangulation,
    /// Where the load or the exact solution is singular, for quadrature grading.
    pub singularity: Option<Singularity>,
}

impl std::fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("label", &self.label)
            .field("eps", &self.eps())
            .field("has_exact", &self.exact.is_some())
            .field("triangles", &self.initial_mesh.num_triangles())
            .finish()
    }
}

impl ProblemSpec {
    pub fn eps(&self) -> Option<f64> {
        match self.kind {
            ProblemKind::Biharmonic { eps, .. } => Some(eps),
            ProblemKind::VonKarman { .. } => None,
        }
    }

    pub fn is_von_karman(&self) -> bool {
        matches!(self.kind, ProblemKind::VonKarman { .. })
    }

    /// Problem by CLI name.
    pub fn by_name(name: &str, eps: Option<f64>) -> Result<Self> {
        match name {
            "square-layer" => example_square_layer(eps.unwrap_or(1.0)),
            "lshape-singular" => example_lshape(eps.unwrap_or(1.0)),
            "vk-square" => Ok(example_vk_square()),
            "vk-cusp" => example_vk_cusp(),
            _ => Err(Error::InvalidParameter(format!(
                "unknown problem '{name}' (expected square-layer, lshape-singular, vk-square or vk-cusp)"
            ))),
        }
    }
}

pub const PROBLEM_NAMES: [&str; 4] = ["square-layer", "lshape-singular", "vk-square", "vk-cusp"];

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("epsilon must be positive, got {eps}")))
    }
}

/// Unit square cut by both diagonals, red-refined once: 16 triangles.
pub fn criss_cross_square() -> Triangulation {
    Triangulation::new(
        vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5]],
        vec![[0, 1, 4], [1, 2, 4], [2, 3, 4], [3, 0, 4]],
    )
    .expect("valid mesh")
    .uniform_refine()
    .mesh
}

/// (−1,1)² ∖ ([0,1)×(−1,0]) from six right isosceles triangles.
pub fn lshape_coarse() -> Triangulation {
    Triangulation::new(
        vec![
            [-1.0, -1.0],
            [0.0, -1.0],
            [-1.0, 0.0],
            [0.0, 0.0],
            [1.0, 0.0],
            [-1.0, 1.0],
            [0.0, 1.0],
            [1.0, 1.0],
        ],
        vec![[0, 1, 3], [0, 3, 2], [2, 3, 5], [3, 6, 5], [3, 4, 7], [3, 7, 6]],
    )
    .expect("valid mesh")
}

/// Opening angle of the cusp domain.
pub const CUSP_ANGLE: f64 = 15.0 * PI / 8.0;

/// (−1,1)² minus the wedge conv{(0,0), (1, −tan(π/8)), (1,0)}.
pub fn cusp_coarse() -> Triangulation {
    let a = (PI / 8.0).tan();
    Triangulation::new(
        vec![
            [-1.0, -1.0],
            [0.0, -1.0],
            [1.0, -1.0],
            [1.0, -a],
            [0.0, 0.0],
            [1.0, 0.0],
            [1.0, 1.0],
            [0.0, 1.0],
            [-1.0, 1.0],
            [-1.0, 0.0],
        ],
        vec![
            [0, 1, 4],
            [0, 4, 9],
            [1, 2, 3],
            [1, 3, 4],
            [4, 5, 6],
            [4, 6, 7],
            [9, 4, 7],
            [9, 7, 8],
        ],
    )
    .expect("valid mesh")
}

/// w(t) = sin(πt) − πε (cosh(1/(2ε)) − cosh((2t−1)/(2ε))) / sinh(1/(2ε)),
/// evaluated in the overflow-free form with a = 1/(2ε), b = (2t−1)/(2ε):
/// (cosh a − cosh b)/sinh a = (1 + e^{−2a} − e^{b−a} − e^{−b−a}) / (1 − e^{−2a}).
pub fn layer_profile(t: Jet4, eps: f64) -> Jet4 {
    let a = 0.5 / eps;
    let b = (t * 2.0 - 1.0) * a;
    let e2a = (-2.0 * a).exp();
    let ratio = ((b - a).exp() + (-b - a).exp() - (1.0 + e2a)) * (-1.0 / (1.0 - e2a));
    (t * PI).sin() - ratio * (PI * eps)
}

/// u = w(x) w(y) with the boundary-layer profile w; clamped on the unit square.
pub fn example_square_layer(eps: f64) -> Result<ProblemSpec> {
    check_eps(eps)?;
    let exact: ExactFn = Arc::new(move |p: Point| Ok(layer_profile(Jet4::x(p[0]), eps) * layer_profile(Jet4::y(p[1]), eps)));
    let u = exact.clone();
    let load: Field = Arc::new(move |p| {
        let j = u(p).expect("smooth everywhere");
        eps * eps * j.bilaplacian() - j.laplacian()
    });
    Ok(ProblemSpec {
        label: format!("square-layer eps={eps}"),
        kind: ProblemKind::Biharmonic { eps, load },
        exact: Some(vec![exact]),
        initial_mesh: criss_cross_square(),
        singularity: None,
    })
}

/// L-shaped domain with load |x + y|^{−1/3}; no exact solution.
pub fn example_lshape(eps: f64) -> Result<ProblemSpec> {
    check_eps(eps)?;
    let load: Field = Arc::new(|p: Point| (p[0] + p[1]).abs().powf(-1.0 / 3.0));
    let mesh = lshape_coarse().uniform_refine().mesh.uniform_refine().mesh;
    Ok(ProblemSpec {
        label: format!("lshape-singular eps={eps}"),
        kind: ProblemKind::Biharmonic { eps, load },
        exact: None,
        initial_mesh: mesh,
        singularity: Some(Singularity::Line {
            normal: [1.0, 1.0],
            offset: 0.0,
        }),
    })
}

/// Loads f₁ = Δ²ψ₁ − [ψ₁, ψ₂], f₂ = Δ²ψ₂ + ½[ψ₁, ψ₁] from the exact jets.
fn vk_loads(psi1: ExactFn, psi2: ExactFn) -> [Field; 2] {
    let (a1, a2) = (psi1.clone(), psi2.clone());
    let f1: Field = Arc::new(move |p| match (a1(p), a2(p)) {
        (Ok(j1), Ok(j2)) => j1.bilaplacian() - bracket(&j1, &j2),
        _ => f64::NAN,
    });
    let f2: Field = Arc::new(move |p| match (psi1(p), psi2(p)) {
        (Ok(j1), Ok(j2)) => j2.bilaplacian() + 0.5 * bracket(&j1, &j1),
        _ => f64::NAN,
    });
    [f1, f2]
}

/// ψ₁ = sin²(πx) sin²(πy), ψ₂ = x²y²(1−x)²(1−y)² on the unit square.
pub fn example_vk_square() -> ProblemSpec {
    let psi1: ExactFn = Arc::new(|p: Point| {
        let sx = (Jet4::x(p[0]) * PI).sin();
        let sy = (Jet4::y(p[1]) * PI).sin();
        Ok(sx * sx * sy * sy)
    });
    let psi2: ExactFn = Arc::new(|p: Point| {
        let (x, y) = (Jet4::x(p[0]), Jet4::y(p[1]));
        let bx = x * (-x + 1.0);
        let by = y * (-y + 1.0);
        Ok(bx * bx * by * by)
    });
    ProblemSpec {
        label: "vk-square".into(),
        kind: ProblemKind::VonKarman {
            loads: vk_loads(psi1.clone(), psi2.clone()),
        },
        exact: Some(vec![psi1, psi2]),
        initial_mesh: criss_cross_square(),
        singularity: None,
    }
}

/// Root of sin(γω) + γ sin(ω) = 0 in [0.45, 0.55] by bisection, i.e. the
/// relevant root of sin²(γω) = γ² sin²(ω) near 1/2.
pub fn cusp_exponent(omega: f64) -> Result<f64> {
    let f = |g: f64| (g * omega).sin() + g * omega.sin();
    let (mut lo, mut hi) = (0.45, 0.55);
    if f(lo) * f(hi) > 0.0 {
        return Err(Error::InvalidParameter(format!("no sign change of the corner equation for omega = {omega}")));
    }
    while hi - lo > 1e-14 {
        let mid = 0.5 * (lo + hi);
        if f(lo) * f(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Angular factor g_{γ,ω}(θ) of the corner singular function.
pub fn cusp_angular(theta: Jet4, gamma: f64, omega: f64) -> Jet4 {
    let (gm, gp) = (gamma - 1.0, gamma + 1.0);
    let c1 = (gm * omega).sin() / gm - (gp * omega).sin() / gp;
    let c2 = (gm * omega).cos() - (gp * omega).cos();
    let cos_part = (theta * gm).cos() - (theta * gp).cos();
    let sin_part = (theta * gm).sin() * (1.0 / gm) - (theta * gp).sin() * (1.0 / gp);
    cos_part * c1 - sin_part * c2
}

/// ψ₁ = ψ₂ = (x²−1)²(y²−1)² r^{1+γ} g_{γ,ω}(θ) on the cusp domain.
pub fn example_vk_cusp() -> Result<ProblemSpec> {
    let omega = CUSP_ANGLE;
    let gamma = cusp_exponent(omega)?;
    let psi: ExactFn = Arc::new(move |p: Point| {
        if p == [0.0, 0.0] {
            return Err(Error::JetDomain(format!("corner singularity at ({}, {})", p[0], p[1])));
        }
        let (x, y) = (Jet4::x(p[0]), Jet4::y(p[1]));
        let mut theta = Jet4::atan2(&y, &x)?;
        if theta.value() < 0.0 {
            theta = theta + 2.0 * PI;
        }
        let bx = x * x - 1.0;
        let by = y * y - 1.0;
        let radial = (x * x + y * y).powf(0.5 * (1.0 + gamma))?;
        Ok(bx * bx * by * by * radial * cusp_angular(theta, gamma, omega))
    });
    Ok(ProblemSpec {
        label: "vk-cusp".into(),
        kind: ProblemKind::VonKarman {
            loads: vk_loads(psi.clone(), psi.clone()),
        },
        exact: Some(vec![psi.clone(), psi]),
        initial_mesh: cusp_coarse().uniform_refine().mesh,
        singularity: Some(Singularity::Point([0.0, 0.0])),
    })
}

/// Error components of a discrete solution against the exact one.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ErrorNorms {
    /// |||u − u_h|||_{ε,pw} (biharmonic) or ∥D²_pw(Ψ − Ψ_h)∥ (von Kármán).
    pub energy: f64,
    /// ∥∇(u − I_h u_h)∥, summed in squares over components.
    pub h1_ih: f64,
}

impl ErrorNorms {
    pub fn total(&self) -> f64 {
        self.energy + self.h1_ih
    }
}

fn sym_diff_sq(a: Sym2, b: Sym2) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    d[0] * d[0] + 2.0 * d[1] * d[1] + d[2] * d[2]
}

/// Error norms by per-triangle quadrature. With `eps = Some(ε)` the energy
/// part is (ε²∥D²_pw e∥² + ∥∇_pw e∥²)^{1/2}, otherwise ∥D²_pw e∥.
pub fn error_norms(
    discrete: &[&MorleyFunction],
    exact: &[ExactFn],
    eps: Option<f64>,
    integration: &Integration,
) -> Result<ErrorNorms> {
    if discrete.len() != exact.len() || discrete.is_empty() {
        return Err(Error::InvalidParameter("one exact component per discrete component required".into()));
    }
    let space = discrete[0].space();
    let mesh = space.mesh();
    let nodal: Vec<_> = discrete.iter().map(|u| nodal_interpolate(u)).collect();
    let parts: Vec<Result<(f64, f64)>> = (0..mesh.num_triangles())
        .into_par_iter()
        .map(|t| {
            let mut energy = 0.0;
            let mut h1 = 0.0;
            for (x, w) in integration.points(mesh, t) {
                for (k, u) in discrete.iter().enumerate() {
                    let j = exact[k](x)?;
                    let (_, g, h) = u.local_jet(t, x);
                    let ge = j.gradient();
                    let hd = sym_diff_sq(j.hessian(), h);
                    let gd = (ge[0] - g[0]).powi(2) + (ge[1] - g[1]).powi(2);
                    energy += w * match eps {
                        Some(e) => e * e * hd + gd,
                        None => hd,
                    };
                    let gi = nodal[k].gradient(t);
                    h1 += w * ((ge[0] - gi[0]).powi(2) + (ge[1] - gi[1]).powi(2));
                }
            }
            Ok((energy, h1))
        })
        .collect();
    let mut energy = 0.0;
    let mut h1 = 0.0;
    for p in parts {
        let (e, h) = p?;
        energy += e;
        h1 += h;
    }
    Ok(ErrorNorms {
        energy: energy.sqrt(),
        h1_ih: h1.sqrt(),
    })
}
