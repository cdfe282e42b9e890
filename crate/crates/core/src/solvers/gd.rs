use super::{inf_norm, IterationRecord, SolverError, SolverReport, Termination};
use crate::problem::Problem;
use crate::timer::Stopwatch;

/// `iters` fixed-size steps `x -= step * grad`, without a line search.
///
/// One record per step plus a final record of the state reached.
pub fn gradient_descent_solve<const N: usize>(
    problem: &mut Problem<'_, N>,
    step: f64,
    iters: usize,
) -> Result<SolverReport, SolverError> {
    if !(step >= 0.0) || !step.is_finite() {
        return Err(SolverError::InvalidConfig("step must be finite and non-negative"));
    }
    let mut report = SolverReport::new();
    let ms_before = problem.stats().derivative_ms;
    for iter in 0..=iters {
        let clock = Stopwatch::start();
        let energy = problem.eval_terms()?;
        if iter == 0 && !energy.is_finite() {
            return Err(SolverError::NonFiniteInitialEnergy(energy));
        }
        let grad_inf_norm = inf_norm(problem.grad());
        let taken = if iter < iters { step } else { 0.0 };
        if taken != 0.0 {
            let g = problem.grad().to_vec();
            problem.x_mut().iter_mut().zip(&g).for_each(|(x, g)| *x -= taken * g);
        }
        report.records.push(IterationRecord {
            iter,
            energy,
            grad_inf_norm,
            step: taken,
            inner_iters: 0,
            time_ms: clock.elapsed_ms(),
        });
    }
    report.termination = Termination::MaxIters;
    report.derivative_ms = problem.stats().derivative_ms - ms_before;
    Ok(report)
}
