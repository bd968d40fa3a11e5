//! Nodal and Morley interpolation, and jumps across faces.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::forms::quadrature::GaussLegendre;
use crate::mesh::{Point, Triangulation};
use crate::morley_space::{sym_mul, MorleyFunction, MorleySpace};

/// Continuous piecewise-affine function given by its vertex values.
#[derive(Debug, Clone)]
pub struct P1Function {
    mesh: Arc<Triangulation>,
    values: Vec<f64>,
}

impl P1Function {
    pub fn new(mesh: Arc<Triangulation>, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.num_vertices() {
            return Err(Error::InvalidParameter(format!(
                "expected {} vertex values, got {}",
                mesh.num_vertices(),
                values.len()
            )));
        }
        Ok(Self { mesh, values })
    }

    /// Interpolates `f` at the vertices.
    pub fn interpolate(mesh: Arc<Triangulation>, f: impl Fn(Point) -> f64) -> Self {
        let values = mesh.vertices().iter().map(|&z| f(z)).collect();
        Self { mesh, values }
    }

    pub fn mesh(&self) -> &Triangulation {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Constant gradient on triangle `t`.
    pub fn gradient(&self, t: usize) -> [f64; 2] {
        let g = self.mesh.barycentric_gradients(t);
        let tri = self.mesh.triangle(t);
        let mut out = [0.0; 2];
        for i in 0..3 {
            out[0] += self.values[tri[i]] * g[i][0];
            out[1] += self.values[tri[i]] * g[i][1];
        }
        out
    }

    pub fn value(&self, t: usize, x: Point) -> f64 {
        let l = self.mesh.barycentric(t, x);
        let tri = self.mesh.triangle(t);
        (0..3).map(|i| l[i] * self.values[tri[i]]).sum()
    }
}

/// I_h: the P1 function sharing the vertex values of `u`.
pub fn nodal_interpolate(u: &MorleyFunction) -> P1Function {
    let space = u.space();
    let nv = space.mesh().num_vertices();
    P1Function {
        mesh: space.mesh_arc().clone(),
        values: u.coeffs()[..nv].to_vec(),
    }
}

/// Number of Gauss points for the face means of I_M. Exact for polynomial
/// normal derivatives up to degree 9, so the mean property holds to rounding
/// for smooth data well beyond quadratics.
const FACE_MEAN_POINTS: usize = 5;

/// I_M: vertex values of `v` and face means of ∂v/∂ν_F.
///
/// `v` returns the value and gradient at a point. The result is not
/// restricted to M_0.
pub fn morley_interpolate(space: &Arc<MorleySpace>, v: impl Fn(Point) -> (f64, [f64; 2])) -> MorleyFunction {
    let mesh = space.mesh();
    let gauss = GaussLegendre::new(FACE_MEAN_POINTS);
    let mut coeffs = vec![0.0; space.ndof()];
    for (z, &p) in mesh.vertices().iter().enumerate() {
        coeffs[space.vertex_dof(z)] = v(p).0;
    }
    for f in 0..mesh.num_faces() {
        let [a, b] = mesh.face_endpoints(f);
        let nu = mesh.face_normal(f);
        let mean: f64 = gauss
            .points
            .iter()
            .zip(&gauss.weights)
            .map(|(&s, &w)| {
                let x = [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
                let g = v(x).1;
                w * (g[0] * nu[0] + g[1] * nu[1])
            })
            .sum();
        coeffs[space.face_dof(f)] = mean;
    }
    MorleyFunction::from_coeffs(space.clone(), coeffs).expect("length matches")
}

/// Polynomial restriction of a jump to a face, parametrized by arc length
/// from the first to the second face vertex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JumpValues {
    /// Affine vector field, given by its values at the two endpoints.
    AffineVector { start: [f64; 2], end: [f64; 2] },
    ConstantVector([f64; 2]),
    Scalar(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpPolynomial {
    pub face: usize,
    pub length: f64,
    pub values: JumpValues,
}

impl JumpPolynomial {
    /// Exact ∥·∥²_{L²(F)}.
    pub fn l2_norm_squared(&self) -> f64 {
        let l = self.length;
        match self.values {
            JumpValues::AffineVector { start, end } => {
                (0..2)
                    .map(|k| start[k] * start[k] + start[k] * end[k] + end[k] * end[k])
                    .sum::<f64>()
                    * l
                    / 3.0
            }
            JumpValues::ConstantVector(c) => (c[0] * c[0] + c[1] * c[1]) * l,
            JumpValues::Scalar(c) => c * c * l,
        }
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_squared().sqrt()
    }

    /// Value at relative position `s ∈ [0, 1]` along the face.
    pub fn eval_vector(&self, s: f64) -> [f64; 2] {
        match self.values {
            JumpValues::AffineVector { start, end } => {
                [start[0] + s * (end[0] - start[0]), start[1] + s * (end[1] - start[1])]
            }
            JumpValues::ConstantVector(c) => c,
            JumpValues::Scalar(c) => [c, 0.0],
        }
    }

    pub fn negated(&self) -> Self {
        let values = match self.values {
            JumpValues::AffineVector { start, end } => JumpValues::AffineVector {
                start: [-start[0], -start[1]],
                end: [-end[0], -end[1]],
            },
            JumpValues::ConstantVector(c) => JumpValues::ConstantVector([-c[0], -c[1]]),
            JumpValues::Scalar(c) => JumpValues::Scalar(-c),
        };
        Self { values, ..*self }
    }
}

/// Quantity whose jump is taken.
#[derive(Debug, Clone, Copy)]
pub enum JumpQuantity<'a> {
    /// ∇u_h of a Morley function.
    Gradient(&'a MorleyFunction),
    /// D²_pw u_h ν_F.
    HessianNormal(&'a MorleyFunction),
    /// ∇v · ν_F for a P1 function v.
    P1GradientNormal(&'a P1Function),
}

impl JumpQuantity<'_> {
    fn mesh(&self) -> &Triangulation {
        match self {
            JumpQuantity::Gradient(u) | JumpQuantity::HessianNormal(u) => u.space().mesh(),
            JumpQuantity::P1GradientNormal(p) => p.mesh(),
        }
    }

    fn trace(&self, t: usize, f: usize) -> JumpValues {
        let mesh = self.mesh();
        let nu = mesh.face_normal(f);
        match *self {
            JumpQuantity::Gradient(u) => {
                let [a, b] = mesh.face_endpoints(f);
                JumpValues::AffineVector {
                    start: u.local_jet(t, a).1,
                    end: u.local_jet(t, b).1,
                }
            }
            JumpQuantity::HessianNormal(u) => JumpValues::ConstantVector(sym_mul(u.hessian(t), nu)),
            JumpQuantity::P1GradientNormal(p) => {
                let g = p.gradient(t);
                JumpValues::Scalar(g[0] * nu[0] + g[1] * nu[1])
            }
        }
    }
}

fn difference(a: JumpValues, b: JumpValues) -> JumpValues {
    match (a, b) {
        (JumpValues::AffineVector { start: s1, end: e1 }, JumpValues::AffineVector { start: s2, end: e2 }) => {
            JumpValues::AffineVector {
                start: [s1[0] - s2[0], s1[1] - s2[1]],
                end: [e1[0] - e2[0], e1[1] - e2[1]],
            }
        }
        (JumpValues::ConstantVector(c1), JumpValues::ConstantVector(c2)) => {
            JumpValues::ConstantVector([c1[0] - c2[0], c1[1] - c2[1]])
        }
        (JumpValues::Scalar(c1), JumpValues::Scalar(c2)) => JumpValues::Scalar(c1 - c2),
        _ => unreachable!("traces of one quantity share a representation"),
    }
}

/// Trace from `first` minus trace from `second` (or the one-sided trace).
pub fn oriented_jump(q: JumpQuantity<'_>, f: usize, first: usize, second: Option<usize>) -> JumpPolynomial {
    let mesh = q.mesh();
    let a = q.trace(first, f);
    let values = match second {
        Some(s) => difference(a, q.trace(s, f)),
        None => a,
    };
    JumpPolynomial {
        face: f,
        length: mesh.face_length(f),
        values,
    }
}

/// [q]_F = q|_{T+} − q|_{T−}; on boundary faces the trace from T+.
pub fn face_jump(f: usize, q: JumpQuantity<'_>) -> JumpPolynomial {
    let face = *q.mesh().face(f);
    oriented_jump(q, f, face.plus, face.minus)
}

/// As [`face_jump`], but rejects boundary faces.
pub fn interior_face_jump(f: usize, q: JumpQuantity<'_>) -> Result<JumpPolynomial> {
    if q.mesh().face(f).is_boundary() {
        return Err(Error::BoundaryFace { face: f });
    }
    Ok(face_jump(f, q))
}
