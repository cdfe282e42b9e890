//! Optimization drivers over a [`Problem`](crate::Problem): Newton with
//! projected local Hessians, matrix-free Newton-CG, L-BFGS and fixed-step
//! gradient descent, with a shared backtracking line search.

mod cg;
mod gd;
mod lbfgs;
mod linesearch;
mod newton;

pub use cg::{cg_linear_solve, preconditioned_cg, CgOutcome, CgStatus};
pub use gd::gradient_descent_solve;
pub use lbfgs::{lbfgs_solve, PostStep};
pub use linesearch::{backtracking_line_search, LineSearchError, LineSearchStep};
pub use newton::{newton_cg_solve, newton_solve, LinearSolver, Preconditioner};

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::problem::ProblemError;

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub max_iters: usize,
    /// Converged when the gradient's max-norm is at or below this.
    pub grad_tol: f64,
    pub armijo_c: f64,
    pub backtrack_factor: f64,
    pub max_backtracks: usize,
    /// Relative residual target of inner CG solves.
    pub cg_tol: f64,
    pub cg_max_iters: usize,
    /// Curvature pairs kept by L-BFGS; zero reduces it to steepest descent.
    pub lbfgs_memory: usize,
    /// Eigenvalue floor for projected local Hessians.
    pub psd_floor: f64,
    /// Project local Hessians in `newton_solve`.
    pub filter_hessian: bool,
    /// Project local Hessians inside the products used by `newton_cg_solve`.
    pub filter_hvp: bool,
    pub preconditioner: Preconditioner,
    /// Drop L-BFGS history whenever the post-step callback runs.
    pub clear_history_on_rebase: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iters: 100,
            grad_tol: 1e-6,
            armijo_c: 1e-4,
            backtrack_factor: 0.5,
            max_backtracks: 64,
            cg_tol: 1e-4,
            cg_max_iters: 200,
            lbfgs_memory: 8,
            psd_floor: 1e-9,
            filter_hessian: true,
            filter_hvp: false,
            preconditioner: Preconditioner::BlockJacobi,
            clear_history_on_rebase: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.armijo_c > 0.0 && self.armijo_c < 1.0) {
            return Err(SolverError::InvalidConfig("armijo_c must lie in (0, 1)"));
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return Err(SolverError::InvalidConfig("backtrack_factor must lie in (0, 1)"));
        }
        if self.max_iters == 0 || self.max_backtracks == 0 || self.cg_max_iters == 0 {
            return Err(SolverError::InvalidConfig("iteration counts must be at least 1"));
        }
        if !(self.psd_floor > 0.0) {
            return Err(SolverError::InvalidConfig("psd_floor must be positive"));
        }
        if !(self.grad_tol >= 0.0) || !(self.cg_tol > 0.0) {
            return Err(SolverError::InvalidConfig("tolerances must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("initial energy is not finite ({0})")]
    NonFiniteInitialEnergy(f64),
    #[error("solver needs a problem evaluated with Hessians")]
    HessianModeRequired,
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxIters,
    LineSearchFailed,
}

/// One outer iteration: the state it started from and the step it took.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    pub energy: f64,
    pub grad_inf_norm: f64,
    /// Accepted step length, zero if no step was taken.
    pub step: f64,
    pub inner_iters: usize,
    pub time_ms: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverReport {
    pub records: Vec<IterationRecord>,
    pub termination: Termination,
    /// Iterations whose direction fell back to steepest descent.
    pub fallback_iters: Vec<usize>,
    /// Iterations whose inner CG stopped on non-positive curvature.
    pub negative_curvature_iters: Vec<usize>,
    /// Wall time spent assembling derivatives and products.
    pub derivative_ms: f64,
}

impl SolverReport {
    pub(crate) fn new() -> Self {
        SolverReport {
            records: Vec::new(),
            termination: Termination::MaxIters,
            fallback_iters: Vec::new(),
            negative_curvature_iters: Vec::new(),
            derivative_ms: 0.0,
        }
    }

    /// Number of accepted steps.
    pub fn steps(&self) -> usize {
        self.records.iter().filter(|r| r.step > 0.0).count()
    }

    pub fn final_energy(&self) -> Option<f64> {
        self.records.last().map(|r| r.energy)
    }

    pub fn initial_energy(&self) -> Option<f64> {
        self.records.first().map(|r| r.energy)
    }

    pub fn total_ms(&self) -> f64 {
        self.records.iter().map(|r| r.time_ms).sum()
    }

    pub fn total_inner_iters(&self) -> usize {
        self.records.iter().map(|r| r.inner_iters).sum()
    }

    /// CSV with header `iter,energy,grad_inf_norm,step,inner_iters,time_ms`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iter,energy,grad_inf_norm,step,inner_iters,time_ms\n");
        for r in &self.records {
            let _ =
                writeln!(out, "{},{},{},{},{},{}", r.iter, r.energy, r.grad_inf_norm, r.step, r.inner_iters, r.time_ms);
        }
        out
    }
}

pub fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| if x.abs() > m || x.is_nan() { x.abs() } else { m })
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    crate::real::sqrt(dot(a, a))
}
