use alloc::vec::Vec;

use super::{dot, SolverConfig};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineSearchStep {
    pub alpha: f64,
    pub energy: f64,
    pub backtracks: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, thiserror::Error)]
pub enum LineSearchError {
    #[error("direction is not a descent direction (slope {slope})")]
    NotDescent { slope: f64 },
    #[error("no acceptable step after {backtracks} backtracks")]
    Exhausted { backtracks: usize },
}

/// Backtracking Armijo search along `d` from `x`, starting at a unit step.
///
/// `energy` is probed at trial points; non-finite trial energies (for example
/// from inverted elements) are rejected like any failed sufficient-decrease
/// test. An accepted step always lowers the energy strictly.
pub fn backtracking_line_search(
    mut energy: impl FnMut(&[f64]) -> f64,
    x: &[f64],
    d: &[f64],
    g: &[f64],
    f0: f64,
    cfg: &SolverConfig,
) -> Result<LineSearchStep, LineSearchError> {
    let slope = dot(g, d);
    if !(slope < 0.0) {
        return Err(LineSearchError::NotDescent { slope });
    }
    let mut trial: Vec<f64> = x.to_vec();
    let mut alpha = 1.0;
    for backtracks in 0..cfg.max_backtracks {
        for ((t, xi), di) in trial.iter_mut().zip(x).zip(d) {
            *t = xi + alpha * di;
        }
        let f = energy(&trial);
        if f.is_finite() && f <= f0 + cfg.armijo_c * alpha * slope && f < f0 {
            return Ok(LineSearchStep { alpha, energy: f, backtracks });
        }
        alpha *= cfg.backtrack_factor;
    }
    Err(LineSearchError::Exhausted { backtracks: cfg.max_backtracks })
}
