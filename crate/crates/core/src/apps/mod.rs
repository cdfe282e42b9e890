//! The four applications built on the public API: implicit-Euler cloth,
//! symmetric Dirichlet parameterization, spherical embedding on a manifold,
//! and Laplacian smoothing, plus the smoothing benchmark kernel.

pub mod bench;
pub mod cloth;
pub mod param;
pub mod smooth;
pub mod sphere;

use alloc::vec::Vec;

use crate::mesh::MeshError;
use crate::problem::ProblemError;
use crate::solvers::SolverError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AppError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("Newton line search failed in time step {step}")]
    StepFailed { step: usize },
    #[error("state became non-finite in time step {step}")]
    NonFinite { step: usize },
    #[error("initialization has inverted faces: {faces:?}")]
    InvertedFaces { faces: Vec<usize> },
    #[error("face {face} has zero area")]
    DegenerateFace { face: usize },
    #[error("mesh is not a topological disk")]
    NotDisk,
    #[error("mesh is not a closed genus-0 surface (Euler characteristic {euler}, {boundary_edges} boundary edges)")]
    NotSphere { euler: i64, boundary_edges: usize },
}

/// Flattens `[x, y, z]` records into a vertex-major vector.
pub fn flatten<const D: usize>(points: &[[f64; D]]) -> Vec<f64> {
    points.iter().flatten().copied().collect()
}

/// Inverse of [`flatten`].
pub fn unflatten<const D: usize>(x: &[f64]) -> Vec<[f64; D]> {
    x.chunks_exact(D).map(|c| core::array::from_fn(|i| c[i])).collect()
}
