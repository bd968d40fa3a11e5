//! Conforming 2D triangulations.
//!
//! Every triangle is stored counterclockwise with its refinement edge between
//! local vertices 0 and 1; local vertex 2 is the newest vertex in the sense of
//! newest-vertex bisection. Face `i` of a triangle is the edge opposite local
//! vertex `i`, so face 2 is always the refinement edge.

mod patches;
mod refine;

use std::collections::HashMap;

pub use patches::Patches;
pub use refine::Refinement;

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Relative area threshold below which a triangle is rejected as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Face {
    /// Endpoints, ordered counterclockwise with respect to `plus`.
    pub vertices: [usize; 2],
    pub plus: usize,
    pub minus: Option<usize>,
}

impl Face {
    pub fn is_boundary(&self) -> bool {
        self.minus.is_none()
    }
}

#[derive(Debug, Clone)]
pub struct Triangulation {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    faces: Vec<Face>,
    triangle_faces: Vec<[usize; 3]>,
    boundary_vertex: Vec<bool>,
    generation: Vec<u32>,
}

fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

fn norm(a: Point) -> f64 {
    a[0].hypot(a[1])
}

fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

impl Triangulation {
    /// Builds a triangulation from raw vertex coordinates and index triples.
    ///
    /// Orientation is normalized to counterclockwise and the refinement edge is
    /// initialized as the longest edge (ties go to the edge whose opposite vertex
    /// has the smallest index).
    pub fn new(vertices: Vec<Point>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let mut oriented = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= vertices.len() {
                    return Err(Error::InvalidIndex {
                        triangle: t,
                        vertex: v,
                        num_vertices: vertices.len(),
                    });
                }
            }
            let [a, b, c] = *tri;
            let (pa, pb, pc) = (vertices[a], vertices[b], vertices[c]);
            let area = 0.5 * cross(sub(pb, pa), sub(pc, pa));
            let h = norm(sub(pb, pa)).max(norm(sub(pc, pb))).max(norm(sub(pa, pc)));
            if area.abs() <= DEGENERACY_TOL * h * h {
                return Err(Error::Degenerate { triangle: t, area });
            }
            let ccw = if area > 0.0 { [a, b, c] } else { [a, c, b] };
            oriented.push(with_longest_edge_first(&vertices, ccw));
        }
        let generation = vec![0; oriented.len()];
        Self::from_oriented(vertices, oriented, generation)
    }

    /// Builds the face table for triangles that are already counterclockwise
    /// with their refinement edge in local position (0, 1).
    pub(crate) fn from_oriented(
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        generation: Vec<u32>,
    ) -> Result<Self> {
        let mut faces: Vec<Face> = Vec::with_capacity(triangles.len() * 3 / 2 + 4);
        let mut triangle_faces = Vec::with_capacity(triangles.len());
        let mut lookup: HashMap<(usize, usize), usize> = HashMap::with_capacity(faces.capacity());
        for (t, tri) in triangles.iter().enumerate() {
            let mut local = [0usize; 3];
            for (i, slot) in local.iter_mut().enumerate() {
                let p = tri[(i + 1) % 3];
                let q = tri[(i + 2) % 3];
                let key = (p.min(q), p.max(q));
                match lookup.get(&key) {
                    None => {
                        lookup.insert(key, faces.len());
                        *slot = faces.len();
                        faces.push(Face {
                            vertices: [p, q],
                            plus: t,
                            minus: None,
                        });
                    }
                    Some(&f) => {
                        let face = &mut faces[f];
                        if face.minus.is_some() {
                            return Err(Error::NonConforming {
                                edge: key,
                                count: 3,
                            });
                        }
                        if face.vertices == [p, q] {
                            return Err(Error::Overlap { edge: key });
                        }
                        face.minus = Some(t);
                        *slot = f;
                    }
                }
            }
            triangle_faces.push(local);
        }
        let mut boundary_vertex = vec![false; vertices.len()];
        for face in faces.iter().filter(|f| f.is_boundary()) {
            boundary_vertex[face.vertices[0]] = true;
            boundary_vertex[face.vertices[1]] = true;
        }
        Ok(Self {
            vertices,
            triangles,
            faces,
            triangle_faces,
            boundary_vertex,
            generation,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn num_interior_faces(&self) -> usize {
        self.faces.iter().filter(|f| !f.is_boundary()).count()
    }

    pub fn num_interior_vertices(&self) -> usize {
        self.boundary_vertex.iter().filter(|b| !**b).count()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> Point {
        self.vertices[v]
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn triangle(&self, t: usize) -> [usize; 3] {
        self.triangles[t]
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn face(&self, f: usize) -> &Face {
        &self.faces[f]
    }

    /// Faces of triangle `t`; entry `i` is opposite local vertex `i`.
    pub fn triangle_faces(&self, t: usize) -> [usize; 3] {
        self.triangle_faces[t]
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary_vertex[v]
    }

    pub fn generation(&self, t: usize) -> u32 {
        self.generation[t]
    }

    pub fn generations(&self) -> &[u32] {
        &self.generation
    }

    /// The refinement edge of `t` as a vertex pair.
    pub fn refinement_edge(&self, t: usize) -> (usize, usize) {
        let [a, b, _] = self.triangles[t];
        (a, b)
    }

    pub fn coords(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.coords(t);
        0.5 * cross(sub(b, a), sub(c, a))
    }

    pub fn area(&self, t: usize) -> f64 {
        self.signed_area(t).abs()
    }

    /// Diameter h_T, the longest edge.
    pub fn diameter(&self, t: usize) -> f64 {
        let [a, b, c] = self.coords(t);
        norm(sub(b, a)).max(norm(sub(c, b))).max(norm(sub(a, c)))
    }

    pub fn centroid(&self, t: usize) -> Point {
        let [a, b, c] = self.coords(t);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    /// Smallest interior angle of `t` in radians.
    pub fn min_angle(&self, t: usize) -> f64 {
        let p = self.coords(t);
        (0..3)
            .map(|i| {
                let u = sub(p[(i + 1) % 3], p[i]);
                let w = sub(p[(i + 2) % 3], p[i]);
                cross(u, w).abs().atan2(u[0] * w[0] + u[1] * w[1])
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn face_endpoints(&self, f: usize) -> [Point; 2] {
        let [p, q] = self.faces[f].vertices;
        [self.vertices[p], self.vertices[q]]
    }

    pub fn face_length(&self, f: usize) -> f64 {
        let [p, q] = self.face_endpoints(f);
        norm(sub(q, p))
    }

    pub fn face_midpoint(&self, f: usize) -> Point {
        let [p, q] = self.face_endpoints(f);
        [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]
    }

    /// Unit normal ν_F, outward with respect to the plus triangle.
    pub fn face_normal(&self, f: usize) -> Point {
        let [p, q] = self.face_endpoints(f);
        let d = sub(q, p);
        let l = norm(d);
        [d[1] / l, -d[0] / l]
    }

    /// Unit tangent τ_F = (0, -1; 1, 0) ν_F.
    pub fn face_tangent(&self, f: usize) -> Point {
        let n = self.face_normal(f);
        [-n[1], n[0]]
    }

    /// Barycentric coordinates of `p` with respect to the local vertices of `t`.
    pub fn barycentric(&self, t: usize, p: Point) -> [f64; 3] {
        let [a, b, c] = self.coords(t);
        let det = cross(sub(b, a), sub(c, a));
        let l1 = cross(sub(p, a), sub(c, a)) / det;
        let l2 = cross(sub(b, a), sub(p, a)) / det;
        [1.0 - l1 - l2, l1, l2]
    }

    pub fn contains(&self, t: usize, p: Point, tol: f64) -> bool {
        self.barycentric(t, p).iter().all(|&l| l >= -tol)
    }

    /// Constant gradients of the three barycentric coordinates on `t`.
    pub fn barycentric_gradients(&self, t: usize) -> [Point; 3] {
        let p = self.coords(t);
        let two_area = 2.0 * self.signed_area(t);
        let mut g = [[0.0; 2]; 3];
        for (i, gi) in g.iter_mut().enumerate() {
            let q1 = p[(i + 1) % 3];
            let q2 = p[(i + 2) % 3];
            *gi = [(q1[1] - q2[1]) / two_area, (q2[0] - q1[0]) / two_area];
        }
        g
    }

    pub fn min_angle_overall(&self) -> f64 {
        (0..self.num_triangles())
            .map(|t| self.min_angle(t))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_diameter(&self) -> f64 {
        (0..self.num_triangles())
            .map(|t| self.diameter(t))
            .fold(0.0, f64::max)
    }

    pub fn min_diameter(&self) -> f64 {
        (0..self.num_triangles())
            .map(|t| self.diameter(t))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.num_triangles()).map(|t| self.area(t)).sum()
    }

    /// Checks the structural invariants: positive orientation and face ownership.
    pub fn check_invariants(&self) -> Result<()> {
        for t in 0..self.num_triangles() {
            let h = self.diameter(t);
            let a = self.signed_area(t);
            if a <= DEGENERACY_TOL * h * h {
                return Err(Error::Degenerate { triangle: t, area: a });
            }
        }
        let mut owners = vec![0usize; self.num_faces()];
        for tf in &self.triangle_faces {
            for &f in tf {
                owners[f] += 1;
            }
        }
        for (f, face) in self.faces.iter().enumerate() {
            let expected = if face.is_boundary() { 1 } else { 2 };
            if owners[f] != expected {
                let [p, q] = face.vertices;
                return Err(Error::NonConforming {
                    edge: (p.min(q), p.max(q)),
                    count: owners[f],
                });
            }
        }
        Ok(())
    }
}

/// Rotates a counterclockwise triple so that its longest edge comes first.
fn with_longest_edge_first(vertices: &[Point], tri: [usize; 3]) -> [usize; 3] {
    let mut best = 0;
    let mut best_len = -1.0;
    for k in 0..3 {
        let p = vertices[tri[(k + 1) % 3]];
        let q = vertices[tri[(k + 2) % 3]];
        let len = norm(sub(q, p));
        let tie = (len - best_len).abs() <= 1e-12 * len.max(best_len);
        if (!tie && len > best_len) || (tie && tri[k] < tri[best]) {
            best = k;
            best_len = len;
        }
    }
    [tri[(best + 1) % 3], tri[(best + 2) % 3], tri[best]]
}
