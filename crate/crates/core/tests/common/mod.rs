//! Independent oracles shared by the integration tests: a Gauss rule on
//! triangles, a Morley basis built directly from monomials, and dense
//! brute-force assembly.

#![allow(dead_code)]

pub mod fd;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Matrix3, Matrix6, Vector3, Vector6};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use morley_adapt::benchmarks::{criss_cross_square, lshape_coarse};
use morley_adapt::forms::{assemble_vk_jacobian, assemble_vk_residual};
use morley_adapt::mesh::{Point, Triangulation};
use morley_adapt::morley_space::{MorleyFunction, MorleySpace};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Gauss–Legendre nodes and weights on [0, 1] by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = Vec::with_capacity(n);
    let mut w = Vec::with_capacity(n);
    for i in 0..n {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x.push(0.5 * (1.0 - z));
        w.push(1.0 / ((1.0 - z * z) * dp * dp));
    }
    (x, w)
}

/// Tensor Gauss rule on the triangle `p` through the collapsed square map.
pub fn triangle_rule(p: [Point; 3], n: usize) -> Vec<(Point, f64)> {
    let (x, w) = gauss_legendre(n);
    let area2 = ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1])).abs();
    let mut out = Vec::with_capacity(n * n);
    for (i, &s) in x.iter().enumerate() {
        for (j, &t) in x.iter().enumerate() {
            let (a, b) = (s, t * (1.0 - s));
            let q = [
                p[0][0] + a * (p[1][0] - p[0][0]) + b * (p[2][0] - p[0][0]),
                p[0][1] + a * (p[1][1] - p[0][1]) + b * (p[2][1] - p[0][1]),
            ];
            out.push((q, w[i] * w[j] * (1.0 - s) * area2));
        }
    }
    out
}

pub fn triangle_integral(p: [Point; 3], n: usize, f: impl Fn(Point) -> f64) -> f64 {
    triangle_rule(p, n).into_iter().map(|(q, w)| w * f(q)).sum()
}

/// Quadratic in physical coordinates: c0 + c1 x + c2 y + c3 x² + c4 xy + c5 y².
#[derive(Debug, Clone, Copy)]
pub struct Quadratic(pub [f64; 6]);

impl Quadratic {
    pub fn value(&self, p: Point) -> f64 {
        let c = self.0;
        let (x, y) = (p[0], p[1]);
        c[0] + c[1] * x + c[2] * y + c[3] * x * x + c[4] * x * y + c[5] * y * y
    }
    pub fn gradient(&self, p: Point) -> [f64; 2] {
        let c = self.0;
        [c[1] + 2.0 * c[3] * p[0] + c[4] * p[1], c[2] + c[4] * p[0] + 2.0 * c[5] * p[1]]
    }
    /// [xx, xy, yy]
    pub fn hessian(&self) -> [f64; 3] {
        let c = self.0;
        [2.0 * c[3], c[4], 2.0 * c[5]]
    }
    pub fn random(rng: &mut impl Rng) -> Self {
        Quadratic(std::array::from_fn(|_| rng.gen_range(-1.0..1.0)))
    }
}

fn monomial_row(p: Point) -> Vector6<f64> {
    Vector6::new(1.0, p[0], p[1], p[0] * p[0], p[0] * p[1], p[1] * p[1])
}

fn monomial_grad(p: Point) -> (Vector6<f64>, Vector6<f64>) {
    (
        Vector6::new(0.0, 1.0, 0.0, 2.0 * p[0], p[1], 0.0),
        Vector6::new(0.0, 0.0, 1.0, 0.0, p[0], 2.0 * p[1]),
    )
}

/// Outward unit normal of the edge a→b for a counterclockwise triangle.
fn outward(a: Point, b: Point) -> Point {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let l = dx.hypot(dy);
    [dy / l, -dx / l]
}

fn ccw(mesh: &Triangulation, t: usize) -> [Point; 3] {
    let mut p = mesh.coords(t);
    let det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
    if det < 0.0 {
        p.swap(1, 2);
    }
    p
}

/// The six global basis functions restricted to one triangle, with global
/// dof numbers: vertex values, then face normal derivatives with respect to
/// the outward normal of the lower-numbered neighbour.
pub struct OracleElement {
    pub dofs: [usize; 6],
    pub basis: [Quadratic; 6],
    pub vertices: [Point; 3],
    /// Gradients of the barycentric coordinates of `vertices`.
    pub hat_gradients: [[f64; 2]; 3],
    pub vertex_ids: [usize; 3],
}

impl OracleElement {
    pub fn new(mesh: &Triangulation, t: usize) -> Self {
        let tri = mesh.triangle(t);
        let pts = mesh.coords(t);
        let nv = mesh.num_vertices();
        let mut rows = Matrix6::zeros();
        let mut dofs = [0; 6];
        for i in 0..3 {
            rows.set_row(i, &monomial_row(pts[i]).transpose());
            dofs[i] = tri[i];
        }
        let faces = mesh.triangle_faces(t);
        for (k, &f) in faces.iter().enumerate() {
            let face = mesh.face(f);
            let [a, b] = face.vertices.map(|v| mesh.vertex(v));
            let owner = face.minus.map_or(face.plus, |m| m.min(face.plus));
            // outward normal of the owner: orient a→b as in the owner's ccw order
            let op = ccw(mesh, owner);
            let idx = |q: Point| op.iter().position(|r| *r == q).unwrap();
            let (ia, ib) = (idx(a), idx(b));
            let nu = if (ia + 1) % 3 == ib { outward(a, b) } else { outward(b, a) };
            let mid = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
            let (gx, gy) = monomial_grad(mid);
            rows.set_row(3 + k, &(gx * nu[0] + gy * nu[1]).transpose());
            dofs[3 + k] = nv + f;
        }
        let inv = rows.try_inverse().expect("regular duality system");
        let basis = std::array::from_fn(|i| {
            let c = inv.column(i);
            Quadratic([c[0], c[1], c[2], c[3], c[4], c[5]])
        });
        let m = Matrix3::from_fn(|i, j| if j == 0 { 1.0 } else { pts[i][j - 1] });
        let minv = m.try_inverse().unwrap();
        let hat_gradients = std::array::from_fn(|i| {
            let c: Vector3<f64> = minv.column(i).into();
            [c[1], c[2]]
        });
        OracleElement {
            dofs,
            basis,
            vertices: pts,
            hat_gradients,
            vertex_ids: tri,
        }
    }

    /// ∇I_h of local basis function `i` (zero for face functions).
    pub fn ih_gradient(&self, i: usize) -> [f64; 2] {
        if i < 3 {
            self.hat_gradients[i]
        } else {
            [0.0, 0.0]
        }
    }
}

/// Free dofs in the documented order: interior vertices, then interior faces.
pub fn oracle_free_dofs(mesh: &Triangulation) -> Vec<usize> {
    let nv = mesh.num_vertices();
    let mut boundary = vec![false; nv];
    for f in mesh.faces() {
        if f.minus.is_none() {
            boundary[f.vertices[0]] = true;
            boundary[f.vertices[1]] = true;
        }
    }
    let mut out: Vec<usize> = (0..nv).filter(|&v| !boundary[v]).collect();
    out.extend((0..mesh.num_faces()).filter(|&f| mesh.face(f).minus.is_some()).map(|f| nv + f));
    out
}

pub fn sym_dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + 2.0 * a[1] * b[1] + a[2] * b[2]
}

pub fn cof_mul(h: [f64; 3], g: [f64; 2]) -> [f64; 2] {
    // cof([[a, b], [b, c]]) = [[c, −b], [−b, a]]
    [h[2] * g[0] - h[1] * g[1], -h[1] * g[0] + h[0] * g[1]]
}

pub fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Dense matrix of a bilinear form given per triangle by `local(el, i, j)`,
/// restricted to the free dofs.
pub fn dense_free_matrix(mesh: &Triangulation, local: impl Fn(&OracleElement, usize, usize) -> f64) -> DMatrix<f64> {
    let free = oracle_free_dofs(mesh);
    let ndof = mesh.num_vertices() + mesh.num_faces();
    let mut index = vec![usize::MAX; ndof];
    for (k, &d) in free.iter().enumerate() {
        index[d] = k;
    }
    let n = free.len();
    let mut a = DMatrix::zeros(n, n);
    for t in 0..mesh.num_triangles() {
        let el = OracleElement::new(mesh, t);
        for i in 0..6 {
            for j in 0..6 {
                let (gi, gj) = (index[el.dofs[i]], index[el.dofs[j]]);
                if gi != usize::MAX && gj != usize::MAX {
                    a[(gi, gj)] += local(&el, i, j);
                }
            }
        }
    }
    a
}

/// Brute-force a_{ε,h} by quadrature of the oracle basis.
pub fn dense_a_eps_h(mesh: &Triangulation, eps: f64) -> DMatrix<f64> {
    dense_free_matrix(mesh, |el, i, j| {
        let (hi, hj) = (el.basis[i].hessian(), el.basis[j].hessian());
        let (gi, gj) = (el.ih_gradient(i), el.ih_gradient(j));
        triangle_integral(el.vertices, 6, |_| eps * eps * sym_dot(hi, hj) + dot(gi, gj))
    })
}

/// Per-triangle local coefficients of a global coefficient vector, in the
/// oracle basis.
pub fn local_coeffs(el: &OracleElement, coeffs: &[f64]) -> [f64; 6] {
    std::array::from_fn(|i| coeffs[el.dofs[i]])
}

pub fn local_function(el: &OracleElement, c: &[f64; 6]) -> Quadratic {
    let mut q = [0.0; 6];
    for (k, b) in el.basis.iter().enumerate() {
        for m in 0..6 {
            q[m] += c[k] * b.0[m];
        }
    }
    Quadratic(q)
}

/// ∇I_h of the function with local coefficients `c`.
pub fn local_ih_gradient(el: &OracleElement, c: &[f64; 6]) -> [f64; 2] {
    let mut g = [0.0; 2];
    for i in 0..3 {
        g[0] += c[i] * el.hat_gradients[i][0];
        g[1] += c[i] * el.hat_gradients[i][1];
    }
    g
}

/// Dense von Kármán residual A_pw(Ψ, Φ) + B_h(Ψ, Ψ, Φ) − ∫ f₁φ₁ − ∫ f₂φ₂ by
/// quadrature, for every free basis pair Φ = (φ, 0) and (0, φ).
pub fn dense_vk_residual(
    mesh: &Triangulation,
    psi1: &[f64],
    psi2: &[f64],
    f1: &dyn Fn(Point) -> f64,
    f2: &dyn Fn(Point) -> f64,
) -> DVector<f64> {
    let free = oracle_free_dofs(mesh);
    let n = free.len();
    let ndof = mesh.num_vertices() + mesh.num_faces();
    let mut index = vec![usize::MAX; ndof];
    for (k, &d) in free.iter().enumerate() {
        index[d] = k;
    }
    let mut r = DVector::zeros(2 * n);
    for t in 0..mesh.num_triangles() {
        let el = OracleElement::new(mesh, t);
        let (c1, c2) = (local_coeffs(&el, psi1), local_coeffs(&el, psi2));
        let (u1, u2) = (local_function(&el, &c1), local_function(&el, &c2));
        let (h1, h2) = (u1.hessian(), u2.hessian());
        let (g1, g2) = (local_ih_gradient(&el, &c1), local_ih_gradient(&el, &c2));
        for i in 0..6 {
            let k = index[el.dofs[i]];
            if k == usize::MAX {
                continue;
            }
            let phi = el.basis[i];
            let gphi = el.ih_gradient(i);
            let a = cof_mul(h1, g2);
            let b = cof_mul(h2, g1);
            let c = cof_mul(h1, g1);
            let first = triangle_integral(el.vertices, 6, |p| {
                sym_dot(phi.hessian(), h1) + 0.5 * dot([a[0] + b[0], a[1] + b[1]], gphi) - f1(p) * phi.value(p)
            });
            let second = triangle_integral(el.vertices, 6, |p| {
                sym_dot(phi.hessian(), h2) - 0.5 * dot(c, gphi) - f2(p) * phi.value(p)
            });
            r[k] += first;
            r[n + k] += second;
        }
    }
    r
}

/// Perturbed criss-cross unit square: interior vertices moved by up to
/// `amount` times the local mesh size.
pub fn perturbed_square(refinements: usize, amount: f64, seed: u64) -> Triangulation {
    let mut mesh = criss_cross_square();
    for _ in 0..refinements {
        mesh = mesh.uniform_refine().mesh;
    }
    let h = mesh.min_diameter();
    let mut r = rng(seed);
    let verts: Vec<Point> = (0..mesh.num_vertices())
        .map(|v| {
            let p = mesh.vertex(v);
            if mesh.is_boundary_vertex(v) {
                p
            } else {
                [p[0] + amount * h * r.gen_range(-1.0..1.0), p[1] + amount * h * r.gen_range(-1.0..1.0)]
            }
        })
        .collect();
    Triangulation::new(verts, mesh.triangles().to_vec()).unwrap()
}

pub fn space(mesh: Triangulation) -> Arc<MorleySpace> {
    Arc::new(MorleySpace::new(Arc::new(mesh)))
}

/// Random function in M_0.
pub fn random_m0(space: &Arc<MorleySpace>, rng: &mut impl Rng) -> MorleyFunction {
    let free: Vec<f64> = (0..space.num_free()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    MorleyFunction::from_free(space.clone(), &free)
}

/// Morley function whose dofs are read from the quadratic `q`.
pub fn quadratic_dofs(space: &Arc<MorleySpace>, q: &Quadratic) -> MorleyFunction {
    let mesh = space.mesh();
    let mut c = vec![0.0; space.ndof()];
    for v in 0..mesh.num_vertices() {
        c[space.vertex_dof(v)] = q.value(mesh.vertex(v));
    }
    for f in 0..mesh.num_faces() {
        let g = q.gradient(mesh.face_midpoint(f));
        let nu = mesh.face_normal(f);
        c[space.face_dof(f)] = dot(g, nu);
    }
    MorleyFunction::from_coeffs(space.clone(), c).unwrap()
}

/// Uniformly random point in the triangle.
pub fn random_point_in(p: [Point; 3], rng: &mut impl Rng) -> Point {
    let (mut a, mut b): (f64, f64) = (rng.gen(), rng.gen());
    if a + b > 1.0 {
        a = 1.0 - a;
        b = 1.0 - b;
    }
    [
        p[0][0] + a * (p[1][0] - p[0][0]) + b * (p[2][0] - p[0][0]),
        p[0][1] + a * (p[1][1] - p[0][1]) + b * (p[2][1] - p[0][1]),
    ]
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).abs().max()
}

pub fn oracle_meshes() -> Vec<Triangulation> {
    let m = vec![
        criss_cross_square(),
        criss_cross_square().uniform_refine().mesh,
        perturbed_square(1, 0.25, 21),
        criss_cross_square().refine(&[1, 2, 7]).mesh.refine(&[0, 3]).mesh,
        lshape_coarse().uniform_refine().mesh.uniform_refine().mesh,
    ];
    assert!(m.iter().all(|mesh| mesh.num_triangles() <= 100));
    m
}

pub fn vk_fixture(mesh: &Triangulation, seed: u64) -> (Arc<MorleySpace>, MorleyFunction, MorleyFunction) {
    let s = space(mesh.clone());
    let mut r = rng(seed);
    let p1 = random_m0(&s, &mut r);
    let p2 = random_m0(&s, &mut r);
    (s, p1, p2)
}

/// Dense Jacobian columns D R(Ψ)[e_k] = A(e_k, ·) + B_h(e_k, Ψ, ·) + B_h(Ψ, e_k, ·),
/// evaluated as differences of the oracle residual, which is quadratic in Ψ.
pub fn dense_vk_jacobian(mesh: &Triangulation, p1: &[f64], p2: &[f64]) -> DMatrix<f64> {
    let free = oracle_free_dofs(mesh);
    let n = free.len();
    let zero = |_: Point| 0.0;
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for col in 0..2 * n {
        // R is quadratic: (R(Ψ + e) − R(Ψ − e)) / 2 is exactly the derivative
        let mut plus = (p1.to_vec(), p2.to_vec());
        let mut minus = (p1.to_vec(), p2.to_vec());
        let (target_p, target_m) = if col < n { (&mut plus.0, &mut minus.0) } else { (&mut plus.1, &mut minus.1) };
        let d = free[col % n];
        target_p[d] += 1.0;
        target_m[d] -= 1.0;
        let rp = dense_vk_residual(mesh, &plus.0, &plus.1, &zero, &zero);
        let rm = dense_vk_residual(mesh, &minus.0, &minus.1, &zero, &zero);
        j.set_column(col, &((rp - rm) * 0.5));
    }
    j
}

pub fn jacobian_fd_error(mesh: &Triangulation, seed: u64) -> f64 {
    let (s, p1, p2) = vk_fixture(mesh, seed);
    let n = s.num_free();
    let mut r = rng(seed + 1000);
    let xi: Vec<f64> = (0..2 * n).map(|_| r.gen_range(-1.0..1.0)).collect();
    let load: Vec<f64> = (0..2 * n).map(|_| r.gen_range(-1.0..1.0)).collect();
    let mut x = p1.free_values();
    x.extend(p2.free_values());
    let eval = |t: f64| {
        let y: Vec<f64> = x.iter().zip(&xi).map(|(a, b)| a + t * b).collect();
        let a = MorleyFunction::from_free(s.clone(), &y[..n]);
        let b = MorleyFunction::from_free(s.clone(), &y[n..]);
        assemble_vk_residual(&s, &a, &b, &load)
    };
    let t = 1e-5;
    let (rp, rm) = (eval(t), eval(-t));
    let jxi = assemble_vk_jacobian(&s, &p1, &p2).mul_vec(&xi);
    rp.iter()
        .zip(&rm)
        .zip(&jxi)
        .map(|((a, b), j)| ((a - b) / (2.0 * t) - j).powi(2))
        .sum::<f64>()
        .sqrt()
}
