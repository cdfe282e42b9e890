//! Laplacian smoothing by gradient descent on `sum_(i,j) |x_i - x_j|^2`,
//! with a per-edge differentiated term and a hand-written gather baseline.

use alloc::vec;
use alloc::vec::Vec;

use super::{flatten, unflatten, AppError};
use crate::mesh::{Mesh, NeighborhoodOp};
use crate::problem::{EvalMode, LocalVars, Problem};
use crate::solvers::{gradient_descent_solve, inf_norm, IterationRecord, SolverReport, Termination};
use crate::timer::Stopwatch;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SmoothMode {
    /// Differentiated per-edge term, scattered.
    Ad,
    /// Closed-form gradient `2 sum_j (x_i - x_j)` gathered per vertex.
    Manual,
}

/// The smoothing energy as a problem over vertex positions.
pub fn smoothing_problem(mesh: &Mesh) -> Result<Problem<'_, 3>, AppError> {
    let mut problem = Problem::<3>::new(mesh, EvalMode::GradientOnly);
    problem.set_x(&flatten(mesh.positions()))?;
    problem
        .add_term::<6, _>(NeighborhoodOp::EV, |_, _, l: &LocalVars<'_, 6, 3>| (l.get(0) - l.get(1)).squared_norm())?;
    Ok(problem)
}

/// Energy and closed-form gradient at `x`.
pub fn manual_energy_gradient(mesh: &Mesh, x: &[f64], grad: &mut [f64]) -> f64 {
    for v in 0..mesh.vertex_count() {
        let mut acc = [0.0; 3];
        for &w in mesh.vertex_vertices(v) {
            for c in 0..3 {
                acc[c] += x[3 * v + c] - x[3 * w + c];
            }
        }
        for c in 0..3 {
            grad[3 * v + c] = 2.0 * acc[c];
        }
    }
    mesh.edges()
        .iter()
        .map(|&[a, b]| {
            (0..3)
                .map(|c| {
                    let d = x[3 * a + c] - x[3 * b + c];
                    d * d
                })
                .sum::<f64>()
        })
        .sum()
}

#[derive(Clone, Debug)]
pub struct SmoothResult {
    pub positions: Vec<[f64; 3]>,
    pub report: SolverReport,
}

/// `iters` steps of `x <- x - lambda * grad E`.
pub fn smooth(mesh: &Mesh, lambda: f64, iters: usize, mode: SmoothMode) -> Result<SmoothResult, AppError> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(AppError::InvalidConfig("step must be finite and non-negative"));
    }
    match mode {
        SmoothMode::Ad => {
            let mut problem = smoothing_problem(mesh)?;
            let report = gradient_descent_solve(&mut problem, lambda, iters)?;
            Ok(SmoothResult { positions: unflatten(problem.x()), report })
        }
        SmoothMode::Manual => {
            let mut x = flatten(mesh.positions());
            let mut g = vec![0.0; x.len()];
            let mut report = SolverReport::new();
            for iter in 0..=iters {
                let clock = Stopwatch::start();
                let energy = manual_energy_gradient(mesh, &x, &mut g);
                let step = if iter < iters { lambda } else { 0.0 };
                x.iter_mut().zip(&g).for_each(|(x, g)| *x -= step * g);
                report.records.push(IterationRecord {
                    iter,
                    energy,
                    grad_inf_norm: inf_norm(&g),
                    step,
                    inner_iters: 0,
                    time_ms: clock.elapsed_ms(),
                });
            }
            report.termination = Termination::MaxIters;
            Ok(SmoothResult { positions: unflatten(&x), report })
        }
    }
}
