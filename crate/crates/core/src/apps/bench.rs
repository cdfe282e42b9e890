//! Timing kernel for the smoothing gradient.

use alloc::vec::Vec;

use super::smooth::smoothing_problem;
use super::AppError;
use crate::mesh::generate_grid;
use crate::problem::{Accumulation, Problem};
use crate::timer::Stopwatch;

/// Grid sides used by the benchmark.
pub const BENCH_SIZES: [usize; 4] = [64, 128, 256, 512];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BenchRow {
    pub n: usize,
    pub vertices: usize,
    pub edges: usize,
    /// Median wall time of one gradient pass.
    pub ms_per_iter: f64,
    pub energy: f64,
}

/// Median time of `reps` gradient evaluations (after one warm-up pass).
pub fn time_gradient(problem: &mut Problem<'_, 3>, reps: usize) -> Result<(f64, f64), AppError> {
    let mut energy = problem.eval_terms()?;
    let mut times: Vec<f64> = (0..reps.max(1))
        .map(|_| {
            let clock = Stopwatch::start();
            energy = problem.eval_terms()?;
            Ok(clock.elapsed_ms())
        })
        .collect::<Result<_, AppError>>()?;
    times.sort_by(f64::total_cmp);
    Ok((times[times.len() / 2], energy))
}

/// Smoothing gradient timing on an `n x n` grid. `configure` can set the
/// thread count or accumulation mode before timing.
pub fn bench_grid(
    n: usize,
    reps: usize,
    accumulation: Accumulation,
    configure: impl FnOnce(&mut Problem<'_, 3>),
) -> Result<BenchRow, AppError> {
    let mesh = generate_grid(n, 1.0 / (n - 1).max(1) as f64)?;
    let mut problem = smoothing_problem(&mesh)?;
    problem.set_accumulation(accumulation);
    configure(&mut problem);
    let (ms_per_iter, energy) = time_gradient(&mut problem, reps)?;
    Ok(BenchRow { n, vertices: mesh.vertex_count(), edges: mesh.edge_count(), ms_per_iter, energy })
}
