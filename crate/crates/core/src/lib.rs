//! Modified Morley finite elements with residual error estimators and
//! adaptive mesh refinement for the singularly perturbed biharmonic
//! equation ε²Δ²u − Δu = f and the von Kármán plate equations, both with
//! clamped boundary conditions.

pub mod adaptivity;
pub mod benchmarks;
pub mod error;
pub mod estimators;
pub mod forms;
pub mod harness;
pub mod mesh;
pub mod morley_space;
pub mod operators;
pub mod solvers;

pub use error::{Error, Result};
