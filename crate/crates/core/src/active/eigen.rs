//! Cyclic Jacobi eigendecomposition for small symmetric matrices and the
//! eigenvalue clamp used to make local Hessians positive definite.

use crate::real;

const OFF_DIAGONAL_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 50;

/// Eigenvalues and eigenvectors (as columns) of a symmetric matrix, so that
/// `a = v * diag(lambda) * v^T`. Only the symmetric part of `a` is used.
pub fn symmetric_eigen<const K: usize>(a: &[[f64; K]; K]) -> ([f64; K], [[f64; K]; K]) {
    let mut m = [[0.0; K]; K];
    for i in 0..K {
        for j in 0..K {
            m[i][j] = 0.5 * (a[i][j] + a[j][i]);
        }
    }
    let mut v = [[0.0; K]; K];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }

    let frob = real::sqrt(m.iter().flatten().map(|x| x * x).sum::<f64>());
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&m) <= OFF_DIAGONAL_TOL * frob {
            break;
        }
        for p in 0..K {
            for q in p + 1..K {
                rotate(&mut m, &mut v, p, q);
            }
        }
    }
    (core::array::from_fn(|i| m[i][i]), v)
}

fn off_diagonal_norm<const K: usize>(m: &[[f64; K]; K]) -> f64 {
    let mut acc = 0.0;
    for i in 0..K {
        for j in 0..K {
            if i != j {
                acc += m[i][j] * m[i][j];
            }
        }
    }
    real::sqrt(acc)
}

/// One Jacobi rotation annihilating `m[p][q]`.
fn rotate<const K: usize>(m: &mut [[f64; K]; K], v: &mut [[f64; K]; K], p: usize, q: usize) {
    let apq = m[p][q];
    if apq == 0.0 {
        return;
    }
    let theta = (m[q][q] - m[p][p]) / (2.0 * apq);
    let t = if theta.is_finite() {
        let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
        sign / (real::abs(theta) + real::sqrt(theta * theta + 1.0))
    } else {
        0.0
    };
    let c = 1.0 / real::sqrt(t * t + 1.0);
    let s = t * c;

    for row in m.iter_mut() {
        let (kp, kq) = (row[p], row[q]);
        row[p] = c * kp - s * kq;
        row[q] = s * kp + c * kq;
    }
    for k in 0..K {
        let (pk, qk) = (m[p][k], m[q][k]);
        m[p][k] = c * pk - s * qk;
        m[q][k] = s * pk + c * qk;
    }
    m[p][q] = 0.0;
    m[q][p] = 0.0;
    for row in v.iter_mut() {
        let (kp, kq) = (row[p], row[q]);
        row[p] = c * kp - s * kq;
        row[q] = s * kp + c * kq;
    }
}

/// Clamps the eigenvalues of a symmetric matrix from below at `floor`.
///
/// Matrices whose spectrum already lies above `floor` are returned unchanged
/// (after symmetrization).
pub fn project_psd<const K: usize>(h: &[[f64; K]; K], floor: f64) -> [[f64; K]; K] {
    let (lambda, q) = symmetric_eigen(h);
    let mut sym = [[0.0; K]; K];
    for i in 0..K {
        for j in i..K {
            let s = 0.5 * (h[i][j] + h[j][i]);
            sym[i][j] = s;
            sym[j][i] = s;
        }
    }
    if lambda.iter().all(|&l| l >= floor) {
        return sym;
    }
    let clamped = lambda.map(|l| if l < floor { floor } else { l });
    let mut out = [[0.0; K]; K];
    for i in 0..K {
        for j in i..K {
            let mut acc = 0.0;
            for k in 0..K {
                acc += q[i][k] * clamped[k] * q[j][k];
            }
            out[i][j] = acc;
            out[j][i] = acc;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psd_input_is_unchanged() {
        let h = [[2.0, 0.0], [0.0, 3.0]];
        assert_eq!(project_psd(&h, 1e-9), h);
    }

    #[test]
    fn indefinite_two_by_two_clamps_negative_pair() {
        // eigenpairs (2, (1,1)/sqrt2) and (-2, (1,-1)/sqrt2)
        let p = project_psd(&[[0.0, 2.0], [2.0, 0.0]], 1e-9);
        for row in p {
            for v in row {
                assert!((v - 1.0).abs() < 1e-8, "{p:?}");
            }
        }
    }

    #[test]
    fn scalar_clamp() {
        assert_eq!(project_psd(&[[-5.0]], 1e-9), [[1e-9]]);
    }

    #[test]
    fn decomposition_reconstructs_input() {
        let a = [[4.0, 1.0, -2.0], [1.0, 0.5, 0.3], [-2.0, 0.3, -1.0]];
        let (l, v) = symmetric_eigen(&a);
        for i in 0..3 {
            for j in 0..3 {
                let r: f64 = (0..3).map(|k| v[i][k] * l[k] * v[j][k]).sum();
                assert!((r - a[i][j]).abs() < 1e-12);
            }
        }
    }
}
