use alloc::collections::VecDeque;
use alloc::vec::Vec;

use super::linesearch::backtracking_line_search;
use super::{dot, inf_norm, norm, IterationRecord, SolverConfig, SolverError, SolverReport, Termination};
use crate::problem::{EvalMode, Problem, ProblemError};
use crate::timer::Stopwatch;

/// Hook run after every accepted step. It may rewrite the problem's state
/// (for example to re-parameterize around the new point); the solver then
/// re-evaluates energy and gradient before continuing.
pub type PostStep<'f, 'a, const N: usize> = &'f mut dyn FnMut(&mut Problem<'a, N>) -> Result<(), ProblemError>;

struct Pair {
    s: Vec<f64>,
    y: Vec<f64>,
    rho: f64,
}

/// Limited-memory BFGS with the two-loop recursion and initial scaling
/// `gamma = s^T y / y^T y` from the newest pair.
///
/// Pairs with `s^T y <= 1e-12 ||s|| ||y||` are skipped. A direction that is
/// not a descent direction clears the history and falls back to the negative
/// gradient. Only gradients are assembled.
pub fn lbfgs_solve<'a, const N: usize>(
    problem: &mut Problem<'a, N>,
    cfg: &SolverConfig,
    mut post_step: Option<PostStep<'_, 'a, N>>,
) -> Result<SolverReport, SolverError> {
    cfg.validate()?;
    let mode = problem.mode();
    problem.set_mode(EvalMode::GradientOnly);
    let result = run(problem, cfg, &mut post_step);
    problem.set_mode(mode);
    result
}

fn run<'a, const N: usize>(
    problem: &mut Problem<'a, N>,
    cfg: &SolverConfig,
    post_step: &mut Option<PostStep<'_, 'a, N>>,
) -> Result<SolverReport, SolverError> {
    let mut report = SolverReport::new();
    let ms_before = problem.stats().derivative_ms;
    let mut history: VecDeque<Pair> = VecDeque::with_capacity(cfg.lbfgs_memory);

    let mut clock = Stopwatch::start();
    let mut energy = problem.eval_terms()?;
    if !energy.is_finite() {
        return Err(SolverError::NonFiniteInitialEnergy(energy));
    }
    let mut g = problem.grad().to_vec();

    for iter in 0..=cfg.max_iters {
        let grad_inf_norm = inf_norm(&g);
        let mut record = IterationRecord { iter, energy, grad_inf_norm, step: 0.0, inner_iters: 0, time_ms: 0.0 };
        if grad_inf_norm <= cfg.grad_tol || iter == cfg.max_iters {
            record.time_ms = clock.elapsed_ms();
            report.records.push(record);
            report.termination =
                if grad_inf_norm <= cfg.grad_tol { Termination::Converged } else { Termination::MaxIters };
            break;
        }

        let mut d = two_loop(&history, &g);
        if !(dot(&g, &d) < 0.0) || d.iter().any(|v| !v.is_finite()) {
            report.fallback_iters.push(iter);
            history.clear();
            d = g.iter().map(|v| -v).collect();
        }

        let x = problem.x().to_vec();
        let probe = |t: &[f64]| problem.eval_energy_only(t).unwrap_or(f64::NAN);
        let step = match backtracking_line_search(probe, &x, &d, &g, energy, cfg) {
            Ok(step) => step,
            Err(_) => {
                record.time_ms = clock.elapsed_ms();
                report.records.push(record);
                report.termination = Termination::LineSearchFailed;
                break;
            }
        };
        let next: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + step.alpha * di).collect();
        problem.set_x(&next)?;
        let next_energy = problem.eval_terms()?;
        let next_g = problem.grad().to_vec();

        if cfg.lbfgs_memory > 0 {
            let s: Vec<f64> = d.iter().map(|di| step.alpha * di).collect();
            let y: Vec<f64> = next_g.iter().zip(&g).map(|(a, b)| a - b).collect();
            let sy = dot(&s, &y);
            if sy > 1e-12 * norm(&s) * norm(&y) {
                if history.len() == cfg.lbfgs_memory {
                    history.pop_front();
                }
                history.push_back(Pair { s, y, rho: 1.0 / sy });
            }
        }

        record.step = step.alpha;
        record.time_ms = clock.elapsed_ms();
        report.records.push(record);
        clock = Stopwatch::start();

        energy = next_energy;
        g = next_g;
        if let Some(hook) = post_step.as_mut() {
            hook(problem)?;
            energy = problem.eval_terms()?;
            g = problem.grad().to_vec();
            if cfg.clear_history_on_rebase {
                history.clear();
            }
        }
    }
    report.derivative_ms = problem.stats().derivative_ms - ms_before;
    Ok(report)
}

fn two_loop(history: &VecDeque<Pair>, g: &[f64]) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(history.len());
    for pair in history.iter().rev() {
        let a = pair.rho * dot(&pair.s, &q);
        q.iter_mut().zip(&pair.y).for_each(|(qi, yi)| *qi -= a * yi);
        alphas.push(a);
    }
    let gamma = history.back().map_or(1.0, |p| dot(&p.s, &p.y) / dot(&p.y, &p.y));
    q.iter_mut().for_each(|qi| *qi *= gamma);
    for (pair, a) in history.iter().zip(alphas.iter().rev()) {
        let b = pair.rho * dot(&pair.y, &q);
        q.iter_mut().zip(&pair.s).for_each(|(qi, si)| *qi += si * (a - b));
    }
    q.iter_mut().for_each(|qi| *qi = -*qi);
    q
}
