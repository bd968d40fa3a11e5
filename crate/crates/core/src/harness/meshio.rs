//! Plain-text mesh format.
//!
//! ```text
//! vertices N triangles M
//! x y          (N lines)
//! i j k        (M lines, 0-based)
//! ```
//! Blank lines and lines starting with `#` are ignored on input.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::mesh::Triangulation;

pub fn write_mesh<W: Write>(mesh: &Triangulation, mut out: W) -> Result<()> {
    writeln!(out, "vertices {} triangles {}", mesh.num_vertices(), mesh.num_triangles())?;
    for p in mesh.vertices() {
        writeln!(out, "{:.17e} {:.17e}", p[0], p[1])?;
    }
    for t in mesh.triangles() {
        writeln!(out, "{} {} {}", t[0], t[1], t[2])?;
    }
    Ok(())
}

/// Reads a mesh; refinement edges are re-initialized to the longest edges.
pub fn read_mesh<R: BufRead>(input: R) -> Result<Triangulation> {
    let mut lines = input
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| match l {
            Ok(s) => {
                let s = s.trim();
                !s.is_empty() && !s.starts_with('#')
            }
            Err(_) => true,
        });
    let parse_err = |line: usize, message: String| Error::Parse { line, message };
    let (line, header) = lines.next().ok_or_else(|| parse_err(1, "empty mesh file".into()))?;
    let header = header?;
    let tok: Vec<&str> = header.split_whitespace().collect();
    let (nv, nt) = match tok.as_slice() {
        ["vertices", n, "triangles", m] => (
            n.parse::<usize>().map_err(|e| parse_err(line, e.to_string()))?,
            m.parse::<usize>().map_err(|e| parse_err(line, e.to_string()))?,
        ),
        _ => return Err(parse_err(line, format!("expected 'vertices N triangles M', got '{header}'"))),
    };
    let mut vertices = Vec::with_capacity(nv);
    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nv {
        let (line, l) = lines.next().ok_or_else(|| parse_err(0, "missing vertex lines".into()))?;
        let l = l?;
        let v: Vec<f64> = l
            .split_whitespace()
            .map(|s| s.parse::<f64>().map_err(|e| parse_err(line, e.to_string())))
            .collect::<Result<_>>()?;
        if v.len() != 2 {
            return Err(parse_err(line, format!("expected 2 coordinates, got {}", v.len())));
        }
        vertices.push([v[0], v[1]]);
    }
    for _ in 0..nt {
        let (line, l) = lines.next().ok_or_else(|| parse_err(0, "missing triangle lines".into()))?;
        let l = l?;
        let v: Vec<usize> = l
            .split_whitespace()
            .map(|s| s.parse::<usize>().map_err(|e| parse_err(line, e.to_string())))
            .collect::<Result<_>>()?;
        if v.len() != 3 {
            return Err(parse_err(line, format!("expected 3 indices, got {}", v.len())));
        }
        triangles.push([v[0], v[1], v[2]]);
    }
    Triangulation::new(vertices, triangles)
}
