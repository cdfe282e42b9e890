use alloc::vec::Vec;

use super::cg::{preconditioned_cg, CgStatus};
use super::linesearch::backtracking_line_search;
use super::{dot, inf_norm, IterationRecord, SolverConfig, SolverError, SolverReport, Termination};
use crate::problem::{BlockSparseMatrix, EvalMode, Problem, ProblemError};
use crate::timer::Stopwatch;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinearSolver {
    /// Dense Cholesky factorization; for small systems.
    DirectDense,
    /// Conjugate gradients on the assembled matrix.
    Cg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preconditioner {
    None,
    /// Inverse of each vertex's diagonal block.
    BlockJacobi,
}

/// Newton's method on the assembled Hessian.
///
/// With `cfg.filter_hessian` every local Hessian is projected to be positive
/// definite before assembly, so the system is SPD and the step is a descent
/// direction. Directions that still fail the descent test (possible with
/// filtering off, or after a breakdown of the linear solve) are replaced by
/// the negative gradient.
pub fn newton_solve<const N: usize>(
    problem: &mut Problem<'_, N>,
    cfg: &SolverConfig,
    linear: LinearSolver,
) -> Result<SolverReport, SolverError> {
    cfg.validate()?;
    if problem.mode() != EvalMode::GradientAndHessian {
        return Err(SolverError::HessianModeRequired);
    }
    let evaluate = |p: &mut Problem<'_, N>| {
        if cfg.filter_hessian {
            p.eval_terms_projected(cfg.psd_floor)
        } else {
            p.eval_terms()
        }
    };
    let direction = |p: &mut Problem<'_, N>, g: &[f64], _iter: usize| -> Result<Direction, SolverError> {
        let h = p.hessian().ok_or(ProblemError::NoHessian)?;
        let rhs: Vec<f64> = g.iter().map(|v| -v).collect();
        Ok(match linear {
            LinearSolver::DirectDense => Direction { d: dense_solve(h, &rhs), inner: 1, negative_curvature: false },
            LinearSolver::Cg => {
                let apply = |v: &[f64], out: &mut [f64]| h.mul_vec(v, out);
                let out = match cfg.preconditioner {
                    Preconditioner::None => {
                        preconditioned_cg(apply, |r, z| z.copy_from_slice(r), &rhs, cfg.cg_tol, cfg.cg_max_iters)
                    }
                    Preconditioner::BlockJacobi => {
                        let jacobi = BlockJacobi::new(h);
                        preconditioned_cg(apply, |r, z| jacobi.apply(r, z), &rhs, cfg.cg_tol, cfg.cg_max_iters)
                    }
                };
                Direction {
                    d: Some(out.x),
                    inner: out.iterations,
                    negative_curvature: out.status == CgStatus::NegativeCurvature,
                }
            }
        })
    };
    descent_loop(problem, cfg, evaluate, direction)
}

/// Truncated Newton with matrix-free Hessian-vector products.
///
/// Only gradients are assembled; the inner CG multiplies by the Hessian
/// through [`Problem::hvp_into`] at the current iterate and stops early on
/// non-positive curvature. The problem's mode is restored on return.
pub fn newton_cg_solve<const N: usize>(
    problem: &mut Problem<'_, N>,
    cfg: &SolverConfig,
) -> Result<SolverReport, SolverError> {
    cfg.validate()?;
    let mode = problem.mode();
    problem.set_mode(EvalMode::GradientOnly);
    let floor = if cfg.filter_hvp { Some(cfg.psd_floor) } else { None };
    let direction = |p: &mut Problem<'_, N>, g: &[f64], _iter: usize| -> Result<Direction, SolverError> {
        let x = p.x().to_vec();
        let rhs: Vec<f64> = g.iter().map(|v| -v).collect();
        let mut failure = None;
        let apply = |v: &[f64], out: &mut [f64]| {
            if let Err(e) = p.hvp_into(&x, v, floor, out) {
                failure.get_or_insert(e);
                out.iter_mut().for_each(|o| *o = 0.0);
            }
        };
        let out = preconditioned_cg(apply, |r, z| z.copy_from_slice(r), &rhs, cfg.cg_tol, cfg.cg_max_iters);
        if let Some(e) = failure {
            return Err(e.into());
        }
        Ok(Direction {
            d: Some(out.x),
            inner: out.iterations,
            negative_curvature: out.status == CgStatus::NegativeCurvature,
        })
    };
    let result = descent_loop(problem, cfg, |p| p.eval_terms(), direction);
    problem.set_mode(mode);
    result
}

struct Direction {
    /// `None` when the linear solve broke down.
    d: Option<Vec<f64>>,
    inner: usize,
    negative_curvature: bool,
}

fn descent_loop<const N: usize>(
    problem: &mut Problem<'_, N>,
    cfg: &SolverConfig,
    mut evaluate: impl FnMut(&mut Problem<'_, N>) -> Result<f64, ProblemError>,
    mut direction: impl FnMut(&mut Problem<'_, N>, &[f64], usize) -> Result<Direction, SolverError>,
) -> Result<SolverReport, SolverError> {
    let mut report = SolverReport::new();
    let ms_before = problem.stats().derivative_ms;
    for iter in 0..=cfg.max_iters {
        let clock = Stopwatch::start();
        let energy = evaluate(problem)?;
        if iter == 0 && !energy.is_finite() {
            return Err(SolverError::NonFiniteInitialEnergy(energy));
        }
        let g = problem.grad().to_vec();
        let grad_inf_norm = inf_norm(&g);
        let mut record = IterationRecord { iter, energy, grad_inf_norm, step: 0.0, inner_iters: 0, time_ms: 0.0 };
        if grad_inf_norm <= cfg.grad_tol {
            record.time_ms = clock.elapsed_ms();
            report.records.push(record);
            report.termination = Termination::Converged;
            break;
        }
        if iter == cfg.max_iters {
            record.time_ms = clock.elapsed_ms();
            report.records.push(record);
            report.termination = Termination::MaxIters;
            break;
        }

        let dir = direction(problem, &g, iter)?;
        record.inner_iters = dir.inner;
        if dir.negative_curvature {
            report.negative_curvature_iters.push(iter);
        }
        let d = match dir.d {
            Some(d) if d.iter().all(|v| v.is_finite()) && dot(&g, &d) < 0.0 => d,
            _ => {
                report.fallback_iters.push(iter);
                g.iter().map(|v| -v).collect()
            }
        };

        let x = problem.x().to_vec();
        let probe = |t: &[f64]| problem.eval_energy_only(t).unwrap_or(f64::NAN);
        match backtracking_line_search(probe, &x, &d, &g, energy, cfg) {
            Ok(step) => {
                let next: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + step.alpha * di).collect();
                problem.set_x(&next)?;
                record.step = step.alpha;
                record.time_ms = clock.elapsed_ms();
                report.records.push(record);
            }
            Err(_) => {
                record.time_ms = clock.elapsed_ms();
                report.records.push(record);
                report.termination = Termination::LineSearchFailed;
                break;
            }
        }
    }
    report.derivative_ms = problem.stats().derivative_ms - ms_before;
    Ok(report)
}

/// Solves `H d = rhs` densely. Rows without entries (fixed or untouched
/// vertices) get a unit diagonal so their component of `d` is `rhs`.
fn dense_solve<const N: usize>(h: &BlockSparseMatrix<N>, rhs: &[f64]) -> Option<Vec<f64>> {
    let n = h.dim();
    let mut m = nalgebra::DMatrix::<f64>::zeros(n, n);
    for (r, c, v) in h.triplets() {
        m[(r, c)] += v;
    }
    for i in 0..n {
        if h.row_columns(i / N).is_empty() {
            m[(i, i)] = 1.0;
        }
    }
    let chol = nalgebra::linalg::Cholesky::new(m)?;
    let d = chol.solve(&nalgebra::DVector::from_column_slice(rhs));
    Some(d.iter().copied().collect())
}

/// Inverses of the diagonal blocks; blocks that are missing or singular act
/// as the identity.
struct BlockJacobi<const N: usize> {
    inverses: Vec<[[f64; N]; N]>,
}

impl<const N: usize> BlockJacobi<N> {
    fn new(h: &BlockSparseMatrix<N>) -> Self {
        let inverses = (0..h.block_rows())
            .map(|i| h.diagonal_block(i).and_then(invert::<N>).unwrap_or_else(identity::<N>))
            .collect();
        BlockJacobi { inverses }
    }

    fn apply(&self, r: &[f64], z: &mut [f64]) {
        for (i, inv) in self.inverses.iter().enumerate() {
            for a in 0..N {
                z[i * N + a] = (0..N).map(|b| inv[a][b] * r[i * N + b]).sum();
            }
        }
    }
}

fn identity<const N: usize>() -> [[f64; N]; N] {
    core::array::from_fn(|i| core::array::from_fn(|j| if i == j { 1.0 } else { 0.0 }))
}

/// Gauss-Jordan inverse with partial pivoting; `None` if (nearly) singular or
/// not positive on the diagonal.
fn invert<const N: usize>(m: [[f64; N]; N]) -> Option<[[f64; N]; N]> {
    let scale = m.iter().flatten().fold(0.0f64, |s, v| s.max(v.abs()));
    if !(scale > 0.0) || (0..N).any(|i| !(m[i][i] > 0.0)) {
        return None;
    }
    let mut a = m;
    let mut inv = identity::<N>();
    for col in 0..N {
        let pivot = (col..N).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() <= 1e-14 * scale {
            return None;
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col];
        for k in 0..N {
            a[col][k] /= p;
            inv[col][k] /= p;
        }
        for row in 0..N {
            if row != col {
                let f = a[row][col];
                if f != 0.0 {
                    for k in 0..N {
                        a[row][k] -= f * a[col][k];
                        inv[row][k] -= f * inv[col][k];
                    }
                }
            }
        }
    }
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_inverse() {
        let m = [[4.0, 1.0], [1.0, 3.0]];
        let inv = invert::<2>(m).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let p: f64 = (0..2).map(|k| m[i][k] * inv[k][j]).sum();
                assert!((p - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
        assert!(invert::<2>([[1.0, 1.0], [1.0, 1.0]]).is_none());
        assert!(invert::<1>([[-1.0]]).is_none());
    }
}
