use alloc::vec;
use alloc::vec::Vec;

use super::{dot, norm};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CgStatus {
    Converged,
    MaxIters,
    /// A search direction with `p^T A p <= 0` was met.
    NegativeCurvature,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    /// Operator applications performed.
    pub iterations: usize,
    pub status: CgStatus,
    pub relative_residual: f64,
}

/// Conjugate gradients for `A x = b` from `x = 0`.
///
/// Stops when `||r|| <= tol * ||b||`. On non-positive curvature the current
/// iterate is returned, or `b` itself if it happens on the first direction.
/// On hitting `max_iters` the iterate with the smallest residual is returned.
pub fn cg_linear_solve(apply: impl FnMut(&[f64], &mut [f64]), b: &[f64], tol: f64, max_iters: usize) -> CgOutcome {
    preconditioned_cg(apply, |r: &[f64], z: &mut [f64]| z.copy_from_slice(r), b, tol, max_iters)
}

/// [`cg_linear_solve`] with a symmetric positive definite preconditioner
/// `precond(r, z)` computing `z = M^{-1} r`.
pub fn preconditioned_cg(
    mut apply: impl FnMut(&[f64], &mut [f64]),
    mut precond: impl FnMut(&[f64], &mut [f64]),
    b: &[f64],
    tol: f64,
    max_iters: usize,
) -> CgOutcome {
    let n = b.len();
    let b_norm = norm(b);
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return CgOutcome { x, iterations: 0, status: CgStatus::Converged, relative_residual: 0.0 };
    }
    let mut r = b.to_vec();
    let mut z = vec![0.0; n];
    precond(&r, &mut z);
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);

    let mut best = x.clone();
    let mut best_res = 1.0;
    let mut iterations = 0;
    while iterations < max_iters {
        apply(&p, &mut ap);
        iterations += 1;
        let curvature = dot(&p, &ap);
        if !(curvature > 0.0) {
            let x = if iterations == 1 { b.to_vec() } else { x };
            let relative_residual = if iterations == 1 { f64::NAN } else { norm(&r) / b_norm };
            return CgOutcome { x, iterations, status: CgStatus::NegativeCurvature, relative_residual };
        }
        let alpha = rz / curvature;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let res = norm(&r) / b_norm;
        if res <= tol {
            return CgOutcome { x, iterations, status: CgStatus::Converged, relative_residual: res };
        }
        if res < best_res {
            best_res = res;
            best.copy_from_slice(&x);
        }
        precond(&r, &mut z);
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    CgOutcome { x: best, iterations, status: CgStatus::MaxIters, relative_residual: best_res }
}
