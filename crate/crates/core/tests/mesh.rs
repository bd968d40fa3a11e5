mod common;

use std::collections::HashMap;

use common::*;
use morley_adapt::benchmarks::{criss_cross_square, cusp_coarse, lshape_coarse};
use morley_adapt::harness::meshio::{read_mesh, write_mesh};
use morley_adapt::mesh::{Patches, Point, Triangulation};
use morley_adapt::Error;
use proptest::prelude::*;
use rand::Rng;

fn square() -> Triangulation {
    Triangulation::new(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]], vec![[0, 1, 2], [0, 2, 3]]).unwrap()
}

/// Edge multiplicities counted from the triangle list alone.
fn edge_counts(mesh: &Triangulation) -> HashMap<(usize, usize), usize> {
    let mut counts = HashMap::new();
    for t in mesh.triangles() {
        for i in 0..3 {
            let (a, b) = (t[i], t[(i + 1) % 3]);
            *counts.entry((a.min(b), a.max(b))).or_insert(0) += 1;
        }
    }
    counts
}

fn signed_area(p: [Point; 3]) -> f64 {
    0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]))
}

fn min_angle(p: [Point; 3]) -> f64 {
    (0..3)
        .map(|i| {
            let (a, b, c) = (p[i], p[(i + 1) % 3], p[(i + 2) % 3]);
            let u = [b[0] - a[0], b[1] - a[1]];
            let v = [c[0] - a[0], c[1] - a[1]];
            (dot(u, v) / (dot(u, u).sqrt() * dot(v, v).sqrt())).acos()
        })
        .fold(f64::MAX, f64::min)
}

/// Conformity without hanging nodes: every edge is shared by at most two
/// triangles, boundary edges cover the domain boundary, and no vertex lies in
/// the interior of another triangle's edge.
fn assert_conforming(mesh: &Triangulation, area: f64) {
    let counts = edge_counts(mesh);
    assert!(counts.values().all(|&c| c == 1 || c == 2));
    for (&(a, b), _) in counts.iter() {
        let (p, q) = (mesh.vertex(a), mesh.vertex(b));
        for (v, x) in mesh.vertices().iter().enumerate() {
            if v == a || v == b {
                continue;
            }
            let cross = (q[0] - p[0]) * (x[1] - p[1]) - (q[1] - p[1]) * (x[0] - p[0]);
            let s = ((x[0] - p[0]) * (q[0] - p[0]) + (x[1] - p[1]) * (q[1] - p[1])) / ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2));
            assert!(!(cross.abs() < 1e-13 && s > 1e-12 && s < 1.0 - 1e-12), "hanging vertex {v} on edge ({a}, {b})");
        }
    }
    let total: f64 = (0..mesh.num_triangles()).map(|t| signed_area(mesh.coords(t))).sum();
    assert!((total - area).abs() < 1e-12);
    assert!((0..mesh.num_triangles()).all(|t| signed_area(mesh.coords(t)) > 0.0));
    mesh.check_invariants().unwrap();
    let interior = counts.values().filter(|&&c| c == 2).count();
    assert_eq!(mesh.num_faces(), counts.len());
    assert_eq!(mesh.num_interior_faces(), interior);
}

#[test]
fn construction_counts() {
    let s = square();
    assert_eq!((s.num_faces(), s.num_interior_faces()), (5, 1));
    let tri = Triangulation::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]]).unwrap();
    assert_eq!((tri.num_faces(), tri.num_interior_faces()), (3, 0));
    let l = lshape_coarse();
    assert_eq!((l.num_vertices(), l.num_triangles(), l.num_faces()), (8, 6, 13));
    assert_eq!(criss_cross_square().num_triangles(), 16);
}

#[test]
fn orientation_normals_and_ownership() {
    let cw = Triangulation::new(vec![[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]], vec![[0, 1, 2]]).unwrap();
    assert!(cw.signed_area(0) > 0.0);
    for mesh in [square(), lshape_coarse(), cusp_coarse(), perturbed_square(1, 0.2, 4)] {
        for f in 0..mesh.num_faces() {
            let face = mesh.face(f);
            if let Some(m) = face.minus {
                assert!(face.plus < m);
            }
            // ν_F points away from the centroid of T_plus
            let c = mesh.centroid(face.plus);
            let mid = mesh.face_midpoint(f);
            let nu = mesh.face_normal(f);
            assert!(dot(nu, [mid[0] - c[0], mid[1] - c[1]]) > 0.0);
            assert!((dot(nu, nu) - 1.0).abs() < 1e-14);
            let tau = mesh.face_tangent(f);
            assert_eq!(tau, [-nu[1], nu[0]]);
        }
    }
}

#[test]
fn invalid_input_is_rejected() {
    let v = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [0.5, -0.5]];
    assert!(matches!(Triangulation::new(v.clone(), vec![[0, 1, 7]]), Err(Error::InvalidIndex { vertex: 7, .. })));
    let flat = vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]];
    assert!(matches!(Triangulation::new(flat, vec![[0, 1, 2]]), Err(Error::Degenerate { triangle: 0, .. })));
    let fan = Triangulation::new(v, vec![[0, 1, 2], [1, 3, 2], [0, 4, 1], [1, 2, 3]]);
    assert!(matches!(fan, Err(Error::NonConforming { .. }) | Err(Error::Overlap { .. })));
    let triple = Triangulation::new(
        vec![[0.0, 0.0], [1.0, 0.0], [0.5, 1.0], [0.5, -1.0], [0.5, 2.0]],
        vec![[0, 1, 2], [1, 0, 3], [0, 1, 4]],
    );
    assert!(matches!(triple, Err(Error::NonConforming { edge: (0, 1), .. }) | Err(Error::Overlap { edge: (0, 1) })));
}

#[test]
fn refine_examples() {
    let tri = Triangulation::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]]).unwrap();
    let r = tri.refine(&[0]);
    assert_eq!(r.mesh.num_triangles(), 2);
    assert_eq!(r.mesh.num_vertices(), 4);
    // the new vertex is the midpoint of the hypotenuse and belongs to both children
    assert_eq!(r.mesh.vertex(3), [0.5, 0.5]);
    assert!(r.mesh.triangles().iter().all(|t| t.contains(&3)));
    assert_eq!(r.parent, vec![0, 0]);

    let r = square().refine(&[0]);
    assert_eq!(r.mesh.num_triangles(), 4);
    assert_conforming(&r.mesh, 1.0);

    let s = square();
    let same = s.refine(&[]);
    assert_eq!(same.mesh.vertices(), s.vertices());
    assert_eq!(same.mesh.triangles(), s.triangles());
}

#[test]
fn uniform_refinement_counts() {
    let r = square().uniform_refine();
    assert_eq!((r.mesh.num_triangles(), r.mesh.num_vertices()), (8, 9));
    assert_eq!(criss_cross_square().uniform_refine().mesh.num_triangles(), 64);
    // counting from the once-refined two-triangle square
    let mut mesh = r.mesh;
    for k in 0..=4 {
        if k > 0 {
            mesh = mesh.uniform_refine().mesh;
        }
        let n = (1usize << (k + 1)) + 1;
        assert_eq!(mesh.num_vertices(), n * n, "k = {k}");
        assert_conforming(&mesh, 1.0);
    }
    // red children are similar to the parent
    let parent = lshape_coarse();
    let r = parent.uniform_refine();
    for (c, &p) in r.parent.iter().enumerate() {
        assert!((r.mesh.area(c) - parent.area(p) / 4.0).abs() < 1e-14);
        assert!((min_angle(r.mesh.coords(c)) - min_angle(parent.coords(p))).abs() < 1e-12);
    }
}

#[test]
fn patch_examples() {
    let s = square();
    let p = Patches::new(&s);
    for f in 0..s.num_faces() {
        let expect = if s.face(f).is_boundary() { 1 } else { 2 };
        assert_eq!(p.face[f].len(), expect);
    }
    assert_eq!(p.enlarged, vec![vec![0, 1], vec![0, 1]]);
    let cc = criss_cross_square();
    let p = Patches::new(&cc);
    let centre = (0..cc.num_vertices()).find(|&v| cc.vertex(v) == [0.5, 0.5]).unwrap();
    assert_eq!(p.vertex[centre].len(), 4);
    for t in 0..cc.num_triangles() {
        // ω_T: T and its edge neighbours; Ω_T: everything sharing a vertex
        let mut by_edge: Vec<usize> = (0..cc.num_triangles())
            .filter(|&s| cc.triangle(s).iter().filter(|v| cc.triangle(t).contains(v)).count() >= 2)
            .collect();
        by_edge.sort_unstable();
        assert_eq!(p.element[t], by_edge);
        let by_vertex: Vec<usize> = (0..cc.num_triangles())
            .filter(|&s| cc.triangle(s).iter().any(|v| cc.triangle(t).contains(v)))
            .collect();
        assert_eq!(p.enlarged[t], by_vertex);
    }
    for f in 0..cc.num_faces() {
        let [a, b] = cc.face(f).vertices;
        let expect: Vec<usize> = (0..cc.num_triangles())
            .filter(|&s| cc.triangle(s).contains(&a) || cc.triangle(s).contains(&b))
            .collect();
        assert_eq!(p.face_nodal[f], expect);
    }
}

#[test]
fn text_format_round_trip() {
    let mesh = perturbed_square(1, 0.2, 6);
    let mut buf = Vec::new();
    write_mesh(&mesh, &mut buf).unwrap();
    let back = read_mesh(buf.as_slice()).unwrap();
    assert_eq!(back.vertices(), mesh.vertices());
    assert_eq!(back.num_triangles(), mesh.num_triangles());
    let commented = "# a comment\nvertices 3 triangles 1\n0 0\n# inside\n1 0\n0 1\n\n0 1 2\n";
    assert_eq!(read_mesh(commented.as_bytes()).unwrap().num_triangles(), 1);
    assert!(matches!(read_mesh("vertices 3 triangles 1\n0 0\n1 x\n0 1\n0 1 2\n".as_bytes()), Err(Error::Parse { line: 3, .. })));
    assert!(read_mesh("triangles 1\n".as_bytes()).is_err());
    assert!(read_mesh("vertices 3 triangles 1\n0 0\n1 0\n".as_bytes()).is_err());
}

/// Initial meshes with their area and perimeter.
fn initial_meshes() -> Vec<(Triangulation, f64, f64)> {
    let t = (std::f64::consts::PI / 8.0).tan();
    vec![
        (criss_cross_square(), 1.0, 4.0),
        (lshape_coarse(), 3.0, 8.0),
        (cusp_coarse(), 4.0 - t / 2.0, 9.0 - t + (1.0 + t * t).sqrt()),
        (perturbed_square(0, 0.2, 1), 1.0, 4.0),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn nvb_keeps_angles_and_conformity(seed in 0u64..10_000, which in 0usize..4, fraction in 0.05f64..0.5) {
        let (initial, area, perimeter) = initial_meshes().swap_remove(which);
        let bound = (0..initial.num_triangles()).map(|t| min_angle(initial.coords(t))).fold(f64::MAX, f64::min) / 2.0 - 1e-9;
        let mut r = rng(seed);
        let mut mesh = initial;
        for _ in 0..12 {
            let marked: Vec<usize> = (0..mesh.num_triangles()).filter(|_| r.gen::<f64>() < fraction).collect();
            let out = mesh.refine(&marked);
            let children = out.children(mesh.num_triangles());
            for &t in &marked {
                prop_assert!(children[t].len() >= 2);
            }
            for (c, &p) in out.parent.iter().enumerate() {
                prop_assert!(out.mesh.area(c) <= mesh.area(p) + 1e-15);
            }
            mesh = out.mesh;
            if mesh.num_triangles() > 20_000 {
                break;
            }
        }
        for t in 0..mesh.num_triangles() {
            prop_assert!(min_angle(mesh.coords(t)) >= bound);
        }
        assert_conforming_fast(&mesh, area, perimeter);
    }

    #[test]
    fn refining_everything_at_least_doubles(which in 0usize..4) {
        let (mesh, _, _) = initial_meshes().swap_remove(which);
        let all: Vec<usize> = (0..mesh.num_triangles()).collect();
        prop_assert!(mesh.refine(&all).mesh.num_triangles() >= 2 * mesh.num_triangles());
    }
}

/// Cheaper conformity check for large meshes: a hanging node leaves
/// single-owner edges inside the domain, which shows up in the boundary length.
fn assert_conforming_fast(mesh: &Triangulation, area: f64, perimeter: f64) {
    let counts = edge_counts(mesh);
    assert!(counts.values().all(|&c| c == 1 || c == 2));
    let boundary: f64 = counts
        .iter()
        .filter(|(_, &c)| c == 1)
        .map(|(&(a, b), _)| {
            let (p, q) = (mesh.vertex(a), mesh.vertex(b));
            ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt()
        })
        .sum();
    assert!((boundary - perimeter).abs() < 1e-9, "{boundary} vs {perimeter}");
    let total: f64 = (0..mesh.num_triangles()).map(|t| signed_area(mesh.coords(t))).sum();
    assert!((total - area).abs() < 1e-10);
    mesh.check_invariants().unwrap();
}
