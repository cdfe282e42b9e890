#![allow(clippy::needless_range_loop)]

mod common;

use meshgrad_core::{lift, Active, Order, SmallMatrix, Vector};
use proptest::prelude::*;

/// Plain-`f64` twin of `active_fn`, used for finite differences.
fn plain_fn(x: &[f64; 4]) -> f64 {
    let r = (x[0] * x[0] + x[1] * x[1] + 1.0).sqrt();
    r * (2.0 + x[2] * x[2]).ln() * x[3].sin().exp() / (1.0 + x[0] * x[3]).powi(2) + x[1].cos() * x[2] - x[3].abs()
}

fn active_fn(v: &[Active<4>; 4]) -> Active<4> {
    let r = (v[0] * v[0] + v[1] * v[1] + 1.0).sqrt();
    r * (v[2].sqr() + 2.0).ln() * v[3].sin().exp() / (v[0] * v[3] + 1.0).powi(2) + v[1].cos() * v[2] - v[3].abs()
}

fn fd_grad(x: &[f64; 4], h: f64) -> [f64; 4] {
    core::array::from_fn(|i| {
        let (mut p, mut m) = (*x, *x);
        p[i] += h;
        m[i] -= h;
        (plain_fn(&p) - plain_fn(&m)) / (2.0 * h)
    })
}

fn fd_hess(x: &[f64; 4], h: f64) -> [[f64; 4]; 4] {
    let g = |y: &[f64; 4]| *active_fn(&lift(*y, Order::Gradient)).grad();
    core::array::from_fn(|i| {
        let (mut p, mut m) = (*x, *x);
        p[i] += h;
        m[i] -= h;
        let (gp, gm) = (g(&p), g(&m));
        core::array::from_fn(|j| (gp[j] - gm[j]) / (2.0 * h))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn derivatives_match_finite_differences(
        a in -1.0f64..1.0, b in -1.0f64..1.0, c in -1.0f64..1.0, d in 0.1f64..0.9,
    ) {
        let x = [a, b, c, d];
        let y = active_fn(&lift(x, Order::Hessian));
        prop_assert!((y.value() - plain_fn(&x)).abs() <= 1e-14 * plain_fn(&x).abs().max(1.0));
        let g = fd_grad(&x, 1e-5);
        let scale = common::inf_norm(&g).max(1.0);
        for i in 0..4 {
            prop_assert!((y.grad()[i] - g[i]).abs() <= 1e-7 * scale, "grad {i}: {} vs {}", y.grad()[i], g[i]);
        }
        let h = fd_hess(&x, 1e-5);
        let hscale = h.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
        for i in 0..4 {
            for j in 0..4 {
                prop_assert!((y.hess()[i][j] - h[i][j]).abs() <= 1e-6 * hscale);
                prop_assert_eq!(y.hess()[i][j], y.hess()[j][i]);
            }
        }
    }

    #[test]
    fn gradient_order_matches_hessian_order(a in -2.0f64..2.0, b in -2.0f64..2.0, c in -2.0f64..2.0, d in 0.1f64..2.0) {
        let x = [a, b, c, d];
        let full = active_fn(&lift(x, Order::Hessian));
        let first = active_fn(&lift(x, Order::Gradient));
        let value = active_fn(&lift(x, Order::Value));
        prop_assert_eq!(full.value(), first.value());
        prop_assert_eq!(full.value(), value.value());
        prop_assert_eq!(full.grad(), first.grad());
        prop_assert!(first.hess().iter().flatten().all(|h| *h == 0.0));
    }

    #[test]
    fn matrix_helpers_agree_with_nalgebra(v in proptest::array::uniform4(-2.0f64..2.0)) {
        let m = SmallMatrix::<Active<4>, 2, 2>(
            [[lift(v, Order::Value)[0], lift(v, Order::Value)[1]], [lift(v, Order::Value)[2], lift(v, Order::Value)[3]]],
        );
        let n = nalgebra::Matrix2::new(v[0], v[1], v[2], v[3]);
        prop_assert!((m.determinant().value() - n.determinant()).abs() < 1e-12);
        if n.determinant().abs() > 1e-3 {
            let (inv, _) = m.inverse_det();
            let ni = n.try_inverse().unwrap();
            for r in 0..2 {
                for c in 0..2 {
                    prop_assert!((inv.0[r][c].value() - ni[(r, c)]).abs() < 1e-9 * ni.abs().max());
                }
            }
        }
    }
}

#[test]
fn cross_and_norm_derivatives() {
    // d/dx |a x b|^2 against finite differences
    let x0 = [0.3, -0.4, 0.5, 1.1, 0.2, -0.7];
    let f = |x: &[f64; 6]| {
        let v = lift(*x, Order::Hessian);
        let a = Vector([v[0], v[1], v[2]]);
        let b = Vector([v[3], v[4], v[5]]);
        a.cross(&b).squared_norm()
    };
    let y = f(&x0);
    for i in 0..6 {
        let (mut p, mut m) = (x0, x0);
        p[i] += 1e-6;
        m[i] -= 1e-6;
        let fd = (f(&p).value() - f(&m).value()) / 2e-6;
        assert!((y.grad()[i] - fd).abs() < 1e-8);
    }
}
