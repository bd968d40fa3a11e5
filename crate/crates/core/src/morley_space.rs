//! The Morley finite element space.
//!
//! Global dofs are numbered vertices first (function values), then faces
//! (normal derivative ∂/∂ν_F at the face midpoint, with ν_F the outward
//! normal of the plus triangle). On the minus triangle the face dof enters the
//! local expansion with sign −1, which keeps the normal derivative at the
//! midpoint single-valued.

use std::io::{BufRead, Write};
use std::sync::Arc;

use nalgebra::{Matrix6, Vector6};

use crate::error::{Error, Result};
use crate::mesh::{Point, Triangulation};

/// Symmetric 2×2 matrix stored as `[xx, xy, yy]`.
pub type Sym2 = [f64; 3];

const INSIDE_TOL: f64 = 1e-10;

/// Local quadratic basis of one triangle, dual to the six Morley dofs.
#[derive(Debug, Clone)]
pub struct LocalElement {
    center: Point,
    scale: f64,
    /// Column `i` holds the monomial coefficients of basis function `i`.
    coef: Matrix6<f64>,
    /// Global dof of each local basis function.
    pub dofs: [usize; 6],
    /// Orientation sign of each local dof relative to its global dof.
    pub signs: [f64; 6],
    hessians: [Sym2; 6],
}

/// Values, gradients and Hessians of the six local basis functions.
#[derive(Debug, Clone, Copy)]
pub struct BasisEvaluation {
    pub values: [f64; 6],
    pub gradients: [[f64; 2]; 6],
    pub hessians: [Sym2; 6],
}

impl LocalElement {
    fn new(mesh: &Triangulation, t: usize) -> Self {
        let p = mesh.coords(t);
        let faces = mesh.triangle_faces(t);
        let center = mesh.centroid(t);
        let scale = mesh.diameter(t);
        let nv = mesh.num_vertices();
        let tri = mesh.triangle(t);

        let mut dofs = [0usize; 6];
        let mut signs = [1.0; 6];
        let mut duality = Matrix6::zeros();
        for i in 0..3 {
            dofs[i] = tri[i];
            let m = monomials(center, scale, p[i]);
            duality.set_row(i, &m.0.transpose());
        }
        for i in 0..3 {
            let f = faces[i];
            let face = mesh.face(f);
            let sign = if face.plus == t { 1.0 } else { -1.0 };
            let nu = mesh.face_normal(f);
            let n = [sign * nu[0], sign * nu[1]];
            let mid = mesh.face_midpoint(f);
            let (_, gx, gy) = monomials(center, scale, mid);
            duality.set_row(3 + i, &(gx * n[0] + gy * n[1]).transpose());
            dofs[3 + i] = nv + f;
            signs[3 + i] = sign;
        }
        let coef = duality
            .try_inverse()
            .expect("Morley duality system is regular on non-degenerate triangles");
        let mut element = Self {
            center,
            scale,
            coef,
            dofs,
            signs,
            hessians: [[0.0; 3]; 6],
        };
        for i in 0..6 {
            element.hessians[i] = element.unsigned_hessian(i);
        }
        element
    }

    fn unsigned_hessian(&self, i: usize) -> Sym2 {
        let h2 = self.scale * self.scale;
        let c = self.coef.column(i);
        [2.0 * c[3] / h2, c[4] / h2, 2.0 * c[5] / h2]
    }

    /// Dual basis (normal derivatives w.r.t. this triangle's outward normals).
    pub fn eval_basis(&self, x: Point) -> BasisEvaluation {
        let (m, gx, gy) = monomials(self.center, self.scale, x);
        let mut out = BasisEvaluation {
            values: [0.0; 6],
            gradients: [[0.0; 2]; 6],
            hessians: self.hessians,
        };
        for i in 0..6 {
            let c = self.coef.column(i);
            out.values[i] = m.dot(&c);
            out.gradients[i] = [gx.dot(&c), gy.dot(&c)];
        }
        out
    }

    /// Basis with orientation signs applied, i.e. the restriction of the
    /// global basis functions to this triangle.
    pub fn eval_signed(&self, x: Point) -> BasisEvaluation {
        let mut e = self.eval_basis(x);
        for i in 3..6 {
            let s = self.signs[i];
            e.values[i] *= s;
            e.gradients[i] = [s * e.gradients[i][0], s * e.gradients[i][1]];
            e.hessians[i] = e.hessians[i].map(|h| s * h);
        }
        e
    }

    /// Constant Hessians of the signed local basis.
    pub fn signed_hessians(&self) -> [Sym2; 6] {
        let mut h = self.hessians;
        for i in 3..6 {
            h[i] = h[i].map(|v| self.signs[i] * v);
        }
        h
    }
}

/// Monomials {1, ξ, η, ξ², ξη, η²} in scaled local coordinates and their x/y derivatives.
fn monomials(center: Point, scale: f64, x: Point) -> (Vector6<f64>, Vector6<f64>, Vector6<f64>) {
    let xi = (x[0] - center[0]) / scale;
    let eta = (x[1] - center[1]) / scale;
    let m = Vector6::new(1.0, xi, eta, xi * xi, xi * eta, eta * eta);
    let gx = Vector6::new(0.0, 1.0, 0.0, 2.0 * xi, eta, 0.0) / scale;
    let gy = Vector6::new(0.0, 0.0, 1.0, 0.0, xi, 2.0 * eta) / scale;
    (m, gx, gy)
}

#[derive(Debug, Clone)]
pub struct MorleySpace {
    mesh: Arc<Triangulation>,
    elements: Vec<LocalElement>,
    free_index: Vec<Option<usize>>,
    free_dofs: Vec<usize>,
}

impl MorleySpace {
    pub fn new(mesh: Arc<Triangulation>) -> Self {
        let elements = (0..mesh.num_triangles())
            .map(|t| LocalElement::new(&mesh, t))
            .collect();
        let nv = mesh.num_vertices();
        let ndof = nv + mesh.num_faces();
        let mut free_index = vec![None; ndof];
        let mut free_dofs = Vec::new();
        for v in 0..nv {
            if !mesh.is_boundary_vertex(v) {
                free_index[v] = Some(free_dofs.len());
                free_dofs.push(v);
            }
        }
        for (f, face) in mesh.faces().iter().enumerate() {
            if !face.is_boundary() {
                free_index[nv + f] = Some(free_dofs.len());
                free_dofs.push(nv + f);
            }
        }
        Self {
            mesh,
            elements,
            free_index,
            free_dofs,
        }
    }

    pub fn mesh(&self) -> &Triangulation {
        &self.mesh
    }

    pub fn mesh_arc(&self) -> &Arc<Triangulation> {
        &self.mesh
    }

    pub fn ndof(&self) -> usize {
        self.free_index.len()
    }

    pub fn num_free(&self) -> usize {
        self.free_dofs.len()
    }

    pub fn free_dofs(&self) -> &[usize] {
        &self.free_dofs
    }

    pub fn free_index(&self, dof: usize) -> Option<usize> {
        self.free_index[dof]
    }

    pub fn is_free(&self, dof: usize) -> bool {
        self.free_index[dof].is_some()
    }

    pub fn vertex_dof(&self, v: usize) -> usize {
        v
    }

    pub fn face_dof(&self, f: usize) -> usize {
        self.mesh.num_vertices() + f
    }

    pub fn is_vertex_dof(&self, dof: usize) -> bool {
        dof < self.mesh.num_vertices()
    }

    pub fn element(&self, t: usize) -> &LocalElement {
        &self.elements[t]
    }

    pub fn elements(&self) -> &[LocalElement] {
        &self.elements
    }
}

/// Requested derivative order for [`MorleyFunction::eval`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    Value,
    Gradient,
    Hessian,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Evaluation {
    Value(f64),
    Gradient([f64; 2]),
    Hessian(Sym2),
}

/// A Morley function: one coefficient per global dof.
#[derive(Debug, Clone)]
pub struct MorleyFunction {
    space: Arc<MorleySpace>,
    coeffs: Vec<f64>,
}

impl MorleyFunction {
    pub fn zero(space: Arc<MorleySpace>) -> Self {
        let n = space.ndof();
        Self {
            space,
            coeffs: vec![0.0; n],
        }
    }

    pub fn from_coeffs(space: Arc<MorleySpace>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != space.ndof() {
            return Err(Error::InvalidParameter(format!(
                "expected {} coefficients, got {}",
                space.ndof(),
                coeffs.len()
            )));
        }
        Ok(Self { space, coeffs })
    }

    /// Builds an M_0 function from values on the free dofs.
    pub fn from_free(space: Arc<MorleySpace>, free: &[f64]) -> Self {
        assert_eq!(free.len(), space.num_free());
        let mut coeffs = vec![0.0; space.ndof()];
        for (&dof, &v) in space.free_dofs().iter().zip(free) {
            coeffs[dof] = v;
        }
        Self { space, coeffs }
    }

    pub fn free_values(&self) -> Vec<f64> {
        self.space.free_dofs().iter().map(|&d| self.coeffs[d]).collect()
    }

    /// Zeroes every constrained dof, projecting onto M_0.
    pub fn restrict_to_m0(&mut self) {
        for (dof, c) in self.coeffs.iter_mut().enumerate() {
            if !self.space.is_free(dof) {
                *c = 0.0;
            }
        }
    }

    pub fn space(&self) -> &Arc<MorleySpace> {
        &self.space
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    /// Local coefficients on triangle `t` with orientation signs applied.
    pub fn local_coeffs(&self, t: usize) -> [f64; 6] {
        let e = self.space.element(t);
        std::array::from_fn(|i| e.signs[i] * self.coeffs[e.dofs[i]])
    }

    fn check_inside(&self, t: usize, x: Point) -> Result<()> {
        if self.space.mesh().contains(t, x, INSIDE_TOL) {
            Ok(())
        } else {
            Err(Error::PointOutside { triangle: t, point: x })
        }
    }

    /// Value, gradient and Hessian on `t` at `x`, without the inside check.
    pub fn local_jet(&self, t: usize, x: Point) -> (f64, [f64; 2], Sym2) {
        let b = self.space.element(t).eval_basis(x);
        let c = self.local_coeffs(t);
        let mut v = 0.0;
        let mut g = [0.0; 2];
        let mut h = [0.0; 3];
        for i in 0..6 {
            v += c[i] * b.values[i];
            g[0] += c[i] * b.gradients[i][0];
            g[1] += c[i] * b.gradients[i][1];
            for k in 0..3 {
                h[k] += c[i] * b.hessians[i][k];
            }
        }
        (v, g, h)
    }

    pub fn value(&self, t: usize, x: Point) -> Result<f64> {
        self.check_inside(t, x)?;
        Ok(self.local_jet(t, x).0)
    }

    pub fn gradient(&self, t: usize, x: Point) -> Result<[f64; 2]> {
        self.check_inside(t, x)?;
        Ok(self.local_jet(t, x).1)
    }

    /// Constant piecewise Hessian D²_pw on triangle `t`.
    pub fn hessian(&self, t: usize) -> Sym2 {
        let hs = self.space.element(t).hessians;
        let c = self.local_coeffs(t);
        let mut h = [0.0; 3];
        for i in 0..6 {
            for k in 0..3 {
                h[k] += c[i] * hs[i][k];
            }
        }
        h
    }

    pub fn eval(&self, t: usize, x: Point, order: Order) -> Result<Evaluation> {
        self.check_inside(t, x)?;
        let (v, g, h) = self.local_jet(t, x);
        Ok(match order {
            Order::Value => Evaluation::Value(v),
            Order::Gradient => Evaluation::Gradient(g),
            Order::Hessian => Evaluation::Hessian(h),
        })
    }

    /// Plain-text serialization: `morley <ndof>` followed by one coefficient per line.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "morley {}", self.coeffs.len())?;
        for c in &self.coeffs {
            writeln!(out, "{c:e}")?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(space: Arc<MorleySpace>, input: R) -> Result<Self> {
        let mut lines = input.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "empty input".into(),
        })?;
        let header = header?;
        let n: usize = header
            .strip_prefix("morley ")
            .and_then(|s| s.trim().parse().ok())
            .ok_or(Error::Parse {
                line: 1,
                message: format!("expected 'morley <ndof>', got '{header}'"),
            })?;
        let mut coeffs = Vec::with_capacity(n);
        for (i, line) in lines {
            let line = line?;
            let s = line.trim();
            if s.is_empty() {
                continue;
            }
            coeffs.push(s.parse::<f64>().map_err(|e| Error::Parse {
                line: i + 1,
                message: e.to_string(),
            })?);
        }
        if coeffs.len() != n {
            return Err(Error::Parse {
                line: n + 1,
                message: format!("expected {n} coefficients, found {}", coeffs.len()),
            });
        }
        Self::from_coeffs(space, coeffs)
    }
}

/// Symmetric 2×2 matrix-vector product.
pub fn sym_mul(h: Sym2, v: [f64; 2]) -> [f64; 2] {
    [h[0] * v[0] + h[1] * v[1], h[1] * v[0] + h[2] * v[1]]
}

/// Frobenius product of two symmetric matrices.
pub fn sym_frobenius(a: Sym2, b: Sym2) -> f64 {
    a[0] * b[0] + 2.0 * a[1] * b[1] + a[2] * b[2]
}

/// cof(A) = (A22, −A12; −A21, A11).
pub fn cofactor(h: Sym2) -> Sym2 {
    [h[2], -h[1], h[0]]
}
