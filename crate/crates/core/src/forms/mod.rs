//! Assembly of the discrete bilinear, trilinear and load forms.
//!
//! All matrices and vectors live on the free dofs of M_0 in the order of
//! [`MorleySpace::free_dofs`]. Von Kármán quantities stack the two
//! components: entries `0..n` belong to ψ₁, `n..2n` to ψ₂.

pub mod quadrature;
pub mod sparse;

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mesh::Point;
use crate::morley_space::{cofactor, sym_frobenius, sym_mul, MorleyFunction, MorleySpace, Sym2};
pub use quadrature::{Integration, QuadratureRule, Singularity};
pub use sparse::SparseMatrix;

/// A scalar field on the plane, e.g. a load.
pub type Field = Arc<dyn Fn(Point) -> f64 + Send + Sync>;

type Local = [[f64; 6]; 6];

fn free_map(space: &MorleySpace, t: usize) -> [Option<usize>; 6] {
    let e = space.element(t);
    e.dofs.map(|d| space.free_index(d))
}

fn scatter(space: &MorleySpace, locals: &[Local]) -> SparseMatrix {
    let n = space.num_free();
    let mut triplets = Vec::with_capacity(locals.len() * 36);
    for (t, k) in locals.iter().enumerate() {
        let map = free_map(space, t);
        for i in 0..6 {
            let Some(gi) = map[i] else { continue };
            for j in 0..6 {
                if let Some(gj) = map[j] {
                    triplets.push((gi, gj, k[i][j]));
                }
            }
        }
    }
    SparseMatrix::from_triplets(n, n, &triplets)
}

fn scatter_vector(space: &MorleySpace, locals: &[[f64; 6]], out: &mut [f64]) {
    for (t, r) in locals.iter().enumerate() {
        let map = free_map(space, t);
        for i in 0..6 {
            if let Some(gi) = map[i] {
                out[gi] += r[i];
            }
        }
    }
}

fn local_matrices(space: &MorleySpace, f: impl Fn(usize) -> Local + Sync + Send) -> Vec<Local> {
    (0..space.mesh().num_triangles()).into_par_iter().map(f).collect()
}

/// Local ∫_T D²φ_i : D²φ_j for the signed basis.
fn local_hessian(space: &MorleySpace, t: usize) -> Local {
    let h = space.element(t).signed_hessians();
    let area = space.mesh().area(t);
    std::array::from_fn(|i| std::array::from_fn(|j| area * sym_frobenius(h[i], h[j])))
}

/// Local ∫_T ∇I_hφ_i · ∇I_hφ_j; only vertex dofs have nonzero nodal interpolants.
fn local_gradient(space: &MorleySpace, t: usize) -> Local {
    let g = space.mesh().barycentric_gradients(t);
    let area = space.mesh().area(t);
    let mut k = [[0.0; 6]; 6];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = area * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
        }
    }
    k
}

/// ∫ D²_pw u : D²_pw v on the free dofs.
pub fn assemble_hessian_part(space: &MorleySpace) -> SparseMatrix {
    scatter(space, &local_matrices(space, |t| local_hessian(space, t)))
}

/// ∫ ∇I_h u · ∇I_h v on the free dofs.
pub fn assemble_gradient_part(space: &MorleySpace) -> SparseMatrix {
    scatter(space, &local_matrices(space, |t| local_gradient(space, t)))
}

/// a_{ε,h}(u, v) = ε² ∫ D²_pw u : D²_pw v + ∫ ∇I_h u · ∇I_h v.
pub fn assemble_a_eps_h(space: &MorleySpace, eps: f64) -> Result<SparseMatrix> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!("epsilon must be positive, got {eps}")));
    }
    let e2 = eps * eps;
    let locals = local_matrices(space, |t| {
        let h = local_hessian(space, t);
        let g = local_gradient(space, t);
        std::array::from_fn(|i| std::array::from_fn(|j| e2 * h[i][j] + g[i][j]))
    });
    Ok(scatter(space, &locals))
}

/// (f, I_h φ_i) for every free basis function φ_i; face entries vanish.
pub fn assemble_load_biharmonic(space: &MorleySpace, f: &(dyn Fn(Point) -> f64 + Sync), integration: &Integration) -> Vec<f64> {
    let mesh = space.mesh();
    let locals: Vec<[f64; 6]> = (0..mesh.num_triangles())
        .into_par_iter()
        .map(|t| {
            let mut r = [0.0; 6];
            for (x, w) in integration.points(mesh, t) {
                let fx = f(x);
                let l = mesh.barycentric(t, x);
                for i in 0..3 {
                    r[i] += w * fx * l[i];
                }
            }
            r
        })
        .collect();
    let mut out = vec![0.0; space.num_free()];
    scatter_vector(space, &locals, &mut out);
    out
}

/// (f, φ_i) with the Morley basis functions themselves.
pub fn assemble_morley_load(space: &MorleySpace, f: &(dyn Fn(Point) -> f64 + Sync), integration: &Integration) -> Vec<f64> {
    let mesh = space.mesh();
    let locals: Vec<[f64; 6]> = (0..mesh.num_triangles())
        .into_par_iter()
        .map(|t| {
            let e = space.element(t);
            let mut r = [0.0; 6];
            for (x, w) in integration.points(mesh, t) {
                let fx = f(x);
                let b = e.eval_signed(x);
                for i in 0..6 {
                    r[i] += w * fx * b.values[i];
                }
            }
            r
        })
        .collect();
    let mut out = vec![0.0; space.num_free()];
    scatter_vector(space, &locals, &mut out);
    out
}

/// Matrix of (ψ, φ) ↦ b_pw(θ, I_hψ, I_hφ) = ½ ∫ (cof(D²_pw θ) ∇I_hψ) · ∇I_hφ.
///
/// Rows index φ, columns ψ.
pub fn assemble_b_pw_matrix(space: &MorleySpace, theta: &MorleyFunction) -> SparseMatrix {
    let mesh = space.mesh();
    let locals = local_matrices(space, |t| {
        let c = cofactor(theta.hessian(t));
        let g = mesh.barycentric_gradients(t);
        let half_area = 0.5 * mesh.area(t);
        let mut k = [[0.0; 6]; 6];
        for i in 0..3 {
            for j in 0..3 {
                let cg = sym_mul(c, g[j]);
                k[i][j] = half_area * (cg[0] * g[i][0] + cg[1] * g[i][1]);
            }
        }
        k
    });
    scatter(space, &locals)
}

/// Which test functions the von Kármán load acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RhsVariant {
    /// ∫ f₁φ₁ + ∫ f₂φ₂ with the Morley test functions.
    #[default]
    Morley,
    /// ∫ f₁ I_hφ₁ + ∫ f₂ I_hφ₂.
    Nodal,
}

/// Stacked load vector (F₁, F₂) of the von Kármán problem.
pub fn assemble_vk_load(
    space: &MorleySpace,
    f1: &(dyn Fn(Point) -> f64 + Sync),
    f2: &(dyn Fn(Point) -> f64 + Sync),
    integration: &Integration,
    variant: RhsVariant,
) -> Vec<f64> {
    let (mut a, b) = match variant {
        RhsVariant::Morley => (
            assemble_morley_load(space, f1, integration),
            assemble_morley_load(space, f2, integration),
        ),
        RhsVariant::Nodal => (
            assemble_load_biharmonic(space, f1, integration),
            assemble_load_biharmonic(space, f2, integration),
        ),
    };
    a.extend(b);
    a
}

/// Per-triangle data of a von Kármán iterate: signed local Hessian basis,
/// barycentric gradients, area, and the Hessians and P1 gradients of ψ₁, ψ₂.
struct VkElement {
    basis: [Sym2; 6],
    grad_l: [Point; 3],
    area: f64,
    hess: [Sym2; 2],
    p1_grad: [[f64; 2]; 2],
}

fn vk_element(space: &MorleySpace, psi: [&MorleyFunction; 2], t: usize) -> VkElement {
    let mesh = space.mesh();
    let grad_l = mesh.barycentric_gradients(t);
    let tri = mesh.triangle(t);
    let p1_grad = psi.map(|p| {
        let mut g = [0.0; 2];
        for i in 0..3 {
            let v = p.coeffs()[space.vertex_dof(tri[i])];
            g[0] += v * grad_l[i][0];
            g[1] += v * grad_l[i][1];
        }
        g
    });
    VkElement {
        basis: space.element(t).signed_hessians(),
        grad_l,
        area: mesh.area(t),
        hess: psi.map(|p| p.hessian(t)),
        p1_grad,
    }
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn add(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] + b[0], a[1] + b[1]]
}

/// Residual A_pw(Ψ, Φ) + B_h(Ψ, Ψ, Φ) − load(Φ) on the stacked free dofs.
pub fn assemble_vk_residual(space: &MorleySpace, psi1: &MorleyFunction, psi2: &MorleyFunction, load: &[f64]) -> Vec<f64> {
    let n = space.num_free();
    assert_eq!(load.len(), 2 * n);
    let locals: Vec<([f64; 6], [f64; 6])> = (0..space.mesh().num_triangles())
        .into_par_iter()
        .map(|t| {
            let e = vk_element(space, [psi1, psi2], t);
            let [h1, h2] = e.hess;
            let [g1, g2] = e.p1_grad;
            let mut r1 = [0.0; 6];
            let mut r2 = [0.0; 6];
            for i in 0..6 {
                r1[i] = e.area * sym_frobenius(e.basis[i], h1);
                r2[i] = e.area * sym_frobenius(e.basis[i], h2);
            }
            let a1 = add(sym_mul(cofactor(h1), g2), sym_mul(cofactor(h2), g1));
            let a2 = sym_mul(cofactor(h1), g1);
            let half = 0.5 * e.area;
            for i in 0..3 {
                r1[i] += half * dot(a1, e.grad_l[i]);
                r2[i] -= half * dot(a2, e.grad_l[i]);
            }
            (r1, r2)
        })
        .collect();
    let mut out: Vec<f64> = load.iter().map(|v| -v).collect();
    let (first, second) = out.split_at_mut(n);
    let r1: Vec<_> = locals.iter().map(|l| l.0).collect();
    let r2: Vec<_> = locals.iter().map(|l| l.1).collect();
    scatter_vector(space, &r1, first);
    scatter_vector(space, &r2, second);
    out
}

/// Exact derivative of [`assemble_vk_residual`] with respect to the stacked free dofs.
pub fn assemble_vk_jacobian(space: &MorleySpace, psi1: &MorleyFunction, psi2: &MorleyFunction) -> SparseMatrix {
    let n = space.num_free();
    let blocks: Vec<[Local; 4]> = (0..space.mesh().num_triangles())
        .into_par_iter()
        .map(|t| {
            let e = vk_element(space, [psi1, psi2], t);
            let [h1, h2] = e.hess;
            let [g1, g2] = e.p1_grad;
            let (c1, c2) = (cofactor(h1), cofactor(h2));
            let half = 0.5 * e.area;
            let mut k = [[[0.0; 6]; 6]; 4];
            for i in 0..6 {
                for j in 0..6 {
                    let a = e.area * sym_frobenius(e.basis[i], e.basis[j]);
                    k[0][i][j] = a;
                    k[3][i][j] = a;
                }
            }
            for i in 0..3 {
                let gi = e.grad_l[i];
                for j in 0..6 {
                    let cj = cofactor(e.basis[j]);
                    // derivative of the Hessian slot
                    k[0][i][j] += half * dot(sym_mul(cj, g2), gi);
                    k[1][i][j] += half * dot(sym_mul(cj, g1), gi);
                    k[2][i][j] -= half * dot(sym_mul(cj, g1), gi);
                    if j < 3 {
                        // derivative of the nodal-gradient slot
                        let gj = e.grad_l[j];
                        k[0][i][j] += half * dot(sym_mul(c2, gj), gi);
                        k[1][i][j] += half * dot(sym_mul(c1, gj), gi);
                        k[2][i][j] -= half * dot(sym_mul(c1, gj), gi);
                    }
                }
            }
            k
        })
        .collect();
    let mut triplets = Vec::with_capacity(blocks.len() * 4 * 36);
    for (t, k) in blocks.iter().enumerate() {
        let map = free_map(space, t);
        for (b, block) in k.iter().enumerate() {
            let (ro, co) = ((b / 2) * n, (b % 2) * n);
            for i in 0..6 {
                let Some(gi) = map[i] else { continue };
                for j in 0..6 {
                    if let Some(gj) = map[j] {
                        if block[i][j] != 0.0 {
                            triplets.push((ro + gi, co + gj, block[i][j]));
                        }
                    }
                }
            }
        }
    }
    SparseMatrix::from_triplets(2 * n, 2 * n, &triplets)
}
