use super::Triangulation;

/// Triangle-id sets of the element, face and vertex patches.
#[derive(Debug, Clone)]
pub struct Patches {
    /// ω_z for every vertex z.
    pub vertex: Vec<Vec<usize>>,
    /// ω_F = T_+ ∪ T_- (or T_+ on the boundary).
    pub face: Vec<Vec<usize>>,
    /// ω_T, the union of ω_F over the faces of T.
    pub element: Vec<Vec<usize>>,
    /// Ω_T, all triangles sharing at least a vertex with T.
    pub enlarged: Vec<Vec<usize>>,
    /// Ω_F, the union of the vertex patches of the endpoints of F.
    pub face_nodal: Vec<Vec<usize>>,
}

fn union(sets: impl IntoIterator<Item = impl IntoIterator<Item = usize>>) -> Vec<usize> {
    let mut out: Vec<usize> = sets.into_iter().flatten().collect();
    out.sort_unstable();
    out.dedup();
    out
}

impl Patches {
    pub fn new(mesh: &Triangulation) -> Self {
        let mut vertex = vec![Vec::new(); mesh.num_vertices()];
        for (t, tri) in mesh.triangles().iter().enumerate() {
            for &v in tri {
                vertex[v].push(t);
            }
        }
        let face: Vec<Vec<usize>> = mesh
            .faces()
            .iter()
            .map(|f| std::iter::once(f.plus).chain(f.minus).collect())
            .collect();
        let element = (0..mesh.num_triangles())
            .map(|t| union(mesh.triangle_faces(t).map(|f| face[f].iter().copied())))
            .collect();
        let enlarged = (0..mesh.num_triangles())
            .map(|t| union(mesh.triangle(t).map(|v| vertex[v].iter().copied())))
            .collect();
        let face_nodal = mesh
            .faces()
            .iter()
            .map(|f| union(f.vertices.map(|v| vertex[v].iter().copied())))
            .collect();
        Self {
            vertex,
            face,
            element,
            enlarged,
            face_nodal,
        }
    }
}
