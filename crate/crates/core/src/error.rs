use thiserror::Error;

use crate::solvers::NewtonTrace;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("triangle {triangle} references vertex {vertex}, but only {num_vertices} vertices exist")]
    InvalidIndex {
        triangle: usize,
        vertex: usize,
        num_vertices: usize,
    },

    #[error("non-conforming input: edge ({}, {}) is shared by {count} triangles", .edge.0, .edge.1)]
    NonConforming { edge: (usize, usize), count: usize },

    #[error("inconsistent orientation: edge ({}, {}) traversed in the same direction by two triangles", .edge.0, .edge.1)]
    Overlap { edge: (usize, usize) },

    #[error("degenerate triangle {triangle} (area {area:e})")]
    Degenerate { triangle: usize, area: f64 },

    #[error("point ({}, {}) lies outside triangle {triangle}", .point[0], .point[1])]
    PointOutside { triangle: usize, point: [f64; 2] },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("interior face required, face {face} lies on the boundary")]
    BoundaryFace { face: usize },

    #[error("singular system: pivot breakdown at dof {dof}")]
    Singular { dof: usize },

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("Newton iteration did not converge after {} iterations (last residual {:e})", .trace.iterations, .trace.residuals.last().copied().unwrap_or(f64::NAN))]
    NotConverged { trace: NewtonTrace },

    #[error("all error indicators vanish; nothing to mark")]
    ZeroIndicators,

    #[error("jet evaluation outside the function domain: {0}")]
    JetDomain(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
