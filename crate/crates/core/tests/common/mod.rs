#![allow(dead_code, clippy::needless_range_loop)]

use meshgrad_core::{BlockSparseMatrix, Problem};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m: f64, x| m.max(x.abs()))
}

/// `|a - b|_inf / |b|_inf`, with the denominator floored at `floor`.
pub fn rel_err(a: &[f64], b: &[f64], floor: f64) -> f64 {
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    inf_norm(&diff) / inf_norm(b).max(floor)
}

/// Central differences of the energy-only pass.
pub fn fd_gradient<const N: usize>(problem: &mut Problem<'_, N>, x: &[f64], h: f64) -> Vec<f64> {
    let mut t = x.to_vec();
    (0..x.len())
        .map(|i| {
            t[i] = x[i] + h;
            let fp = problem.eval_energy_only(&t).unwrap();
            t[i] = x[i] - h;
            let fm = problem.eval_energy_only(&t).unwrap();
            t[i] = x[i];
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

/// Dense central differences of the assembled gradient; row-major.
pub fn fd_hessian<const N: usize>(problem: &mut Problem<'_, N>, x: &[f64], h: f64) -> Vec<f64> {
    let n = x.len();
    let mut out = vec![0.0; n * n];
    let mut t = x.to_vec();
    for j in 0..n {
        t[j] = x[j] + h;
        problem.set_x(&t).unwrap();
        problem.eval_terms().unwrap();
        let gp = problem.grad().to_vec();
        t[j] = x[j] - h;
        problem.set_x(&t).unwrap();
        problem.eval_terms().unwrap();
        let gm = problem.grad().to_vec();
        t[j] = x[j];
        for i in 0..n {
            out[i * n + j] = (gp[i] - gm[i]) / (2.0 * h);
        }
    }
    problem.set_x(x).unwrap();
    out
}

/// Entries of `dense` above `tol` that fall outside the stored pattern.
pub fn outside_pattern<const N: usize>(h: &BlockSparseMatrix<N>, dense: &[f64], tol: f64) -> Vec<(usize, usize)> {
    let n = h.dim();
    let mut out = Vec::new();
    for r in 0..n {
        for c in 0..n {
            if dense[r * n + c].abs() > tol && h.block_index(r / N, c / N).is_none() {
                out.push((r, c));
            }
        }
    }
    out
}

pub fn perturbed(x: &[f64], scale: f64, rng: &mut StdRng) -> Vec<f64> {
    x.iter().map(|v| v + scale * rng.gen_range(-1.0..1.0)).collect()
}

pub fn random_vec(n: usize, rng: &mut StdRng) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Symmetric `K x K` matrix with entries in `[-1, 1]`.
pub fn random_symmetric<const K: usize>(rng: &mut StdRng) -> [[f64; K]; K] {
    let mut m = [[0.0; K]; K];
    for i in 0..K {
        for j in i..K {
            let v = rng.gen_range(-1.0..1.0);
            m[i][j] = v;
            m[j][i] = v;
        }
    }
    m
}

/// Eigenvalues through nalgebra, used as an independent oracle.
pub fn eigenvalues<const K: usize>(m: &[[f64; K]; K]) -> Vec<f64> {
    let a = nalgebra::DMatrix::from_fn(K, K, |i, j| m[i][j]);
    let mut ev: Vec<f64> = a.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}
