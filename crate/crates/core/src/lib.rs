//! Forward-mode differentiation of partially separable energies on triangle meshes.
//!
//! An objective is written as a sum of small local terms, one per mesh element
//! (face, edge or vertex). Each term is evaluated on a fixed-arity [`Active`]
//! scalar that carries its value, local gradient and local Hessian, and the
//! [`Problem`] scatters those local derivatives into a global gradient, a block
//! CSR Hessian whose pattern is derived from mesh connectivity, or a
//! matrix-free Hessian-vector product.
//!
//! The crate is `no_std` (with `alloc`) when the default `std` feature is
//! disabled. Without `std`, evaluation runs serially and solver reports carry
//! no timings.

#![cfg_attr(not(feature = "std"), no_std)]
// `!(a > b)` is deliberate: NaN must take the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::too_many_arguments)]

extern crate alloc;

pub mod active;
pub mod apps;
pub mod mesh;
pub mod problem;
pub mod solvers;

mod real;
mod timer;

pub use crate::active::{lift, project_psd, symmetric_eigen, Active, ActiveVec, Order, SmallMatrix, Vector};
pub use crate::mesh::{ElementHandle, ElementKind, Mesh, MeshError, NeighborhoodOp};
pub use crate::problem::{
    Accumulation, BlockSparseMatrix, EvalMode, LocalVars, Problem, ProblemError, SelectionMap, TermId,
};
pub use crate::solvers::{
    gradient_descent_solve, inf_norm, lbfgs_solve, newton_cg_solve, newton_solve, LinearSolver, Preconditioner,
    SolverConfig, SolverError, SolverReport, Termination,
};
