//! Newest-vertex bisection and red refinement.

use std::collections::HashMap;

use super::{Point, Triangulation};

/// Result of a refinement step.
#[derive(Debug, Clone)]
pub struct Refinement {
    pub mesh: Triangulation,
    /// Parent (in the input mesh) of every triangle of the output mesh.
    pub parent: Vec<usize>,
}

impl Refinement {
    /// Parent → children map.
    pub fn children(&self, num_parents: usize) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); num_parents];
        for (child, &p) in self.parent.iter().enumerate() {
            out[p].push(child);
        }
        out
    }
}

fn midpoint(a: Point, b: Point) -> Point {
    [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
}

fn key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

impl Triangulation {
    /// Newest-vertex bisection of the marked triangles plus closure.
    ///
    /// Each marked triangle has its refinement edge bisected; the closure marks
    /// the refinement edge of every triangle that has any marked edge until no
    /// hanging nodes remain. Triangles are then split into 2, 3 or 4 children.
    pub fn refine(&self, marked: &[usize]) -> Refinement {
        let nf = self.num_faces();
        let mut edge_marked = vec![false; nf];
        let mut queue = Vec::new();
        for &t in marked {
            let f = self.triangle_faces(t)[2];
            if !edge_marked[f] {
                edge_marked[f] = true;
                queue.push(f);
            }
        }
        while let Some(f) = queue.pop() {
            let face = *self.face(f);
            for t in std::iter::once(face.plus).chain(face.minus) {
                let r = self.triangle_faces(t)[2];
                if !edge_marked[r] {
                    edge_marked[r] = true;
                    queue.push(r);
                }
            }
        }

        let mut vertices = self.vertices().to_vec();
        let mut mids: HashMap<(usize, usize), usize> = HashMap::new();
        for (f, face) in self.faces().iter().enumerate() {
            if edge_marked[f] {
                let [p, q] = face.vertices;
                mids.insert(key(p, q), vertices.len());
                vertices.push(midpoint(vertices[p], vertices[q]));
            }
        }

        let mut triangles = Vec::with_capacity(self.num_triangles() + 2 * mids.len());
        let mut generation = Vec::with_capacity(triangles.capacity());
        let mut parent = Vec::with_capacity(triangles.capacity());
        for t in 0..self.num_triangles() {
            bisect(
                self.triangle(t),
                self.generation(t),
                &mids,
                &mut |tri, gen| {
                    triangles.push(tri);
                    generation.push(gen);
                    parent.push(t);
                },
            );
        }
        let mesh = Triangulation::from_oriented(vertices, triangles, generation)
            .expect("bisection preserves conformity");
        debug_assert!(mesh.check_invariants().is_ok());
        Refinement { mesh, parent }
    }

    /// Red refinement: every triangle is replaced by four similar children.
    ///
    /// Children inherit the parent's vertex ordering under the similarity map,
    /// so the refinement edges stay parallel to the parent's.
    pub fn uniform_refine(&self) -> Refinement {
        let mut vertices = self.vertices().to_vec();
        let mut mid_of_face = Vec::with_capacity(self.num_faces());
        for face in self.faces() {
            let [p, q] = face.vertices;
            mid_of_face.push(vertices.len());
            vertices.push(midpoint(vertices[p], vertices[q]));
        }
        let mut triangles = Vec::with_capacity(4 * self.num_triangles());
        let mut generation = Vec::with_capacity(4 * self.num_triangles());
        let mut parent = Vec::with_capacity(4 * self.num_triangles());
        for t in 0..self.num_triangles() {
            let [a, b, c] = self.triangle(t);
            let [f_bc, f_ca, f_ab] = self.triangle_faces(t);
            let (m_bc, m_ca, m_ab) = (mid_of_face[f_bc], mid_of_face[f_ca], mid_of_face[f_ab]);
            for child in [[a, m_ab, m_ca], [m_ab, b, m_bc], [m_ca, m_bc, c], [m_bc, m_ca, m_ab]] {
                triangles.push(child);
                generation.push(self.generation(t) + 2);
                parent.push(t);
            }
        }
        let mesh = Triangulation::from_oriented(vertices, triangles, generation)
            .expect("red refinement preserves conformity");
        Refinement { mesh, parent }
    }
}

fn bisect(
    tri: [usize; 3],
    gen: u32,
    mids: &HashMap<(usize, usize), usize>,
    emit: &mut impl FnMut([usize; 3], u32),
) {
    let [a, b, c] = tri;
    match mids.get(&key(a, b)) {
        None => emit(tri, gen),
        Some(&m) => {
            bisect([c, a, m], gen + 1, mids, emit);
            bisect([b, c, m], gen + 1, mids, emit);
        }
    }
}
