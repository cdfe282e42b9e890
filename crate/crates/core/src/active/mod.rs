//! Fixed-arity forward-mode scalars.
//!
//! [`Active<K>`] carries a value together with its gradient and (optionally)
//! its Hessian with respect to `K` local variables. All arithmetic propagates
//! derivatives by the chain rule; Hessian updates are written to the upper
//! triangle and mirrored, so the stored Hessian is always bitwise symmetric.
//!
//! Out-of-domain inputs (`ln` of a negative number, division by zero) do not
//! panic: they produce non-finite values which the solvers treat as an
//! infeasible state.

mod eigen;
mod linalg;

pub use eigen::{project_psd, symmetric_eigen};
pub use linalg::{ActiveVec, Scalar, SmallMatrix, Vector};

use core::fmt;
use core::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use crate::real;

/// How many derivative orders an [`Active`] tracks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Order {
    /// Value only; gradient and Hessian stay zero.
    Value,
    Gradient,
    Hessian,
}

/// Forward-mode scalar over `K` local variables.
#[derive(Clone, Copy)]
pub struct Active<const K: usize> {
    value: f64,
    grad: [f64; K],
    hess: [[f64; K]; K],
    order: Order,
}

/// Lifts `values` into independent active variables: element `i` gets the
/// unit gradient `e_i` and a zero Hessian.
pub fn lift<const K: usize>(values: [f64; K], order: Order) -> [Active<K>; K] {
    core::array::from_fn(|i| Active::variable(values[i], i, order))
}

impl<const K: usize> Active<K> {
    /// A passive constant: zero gradient and Hessian.
    #[inline]
    pub fn constant(value: f64) -> Self {
        Active { value, grad: [0.0; K], hess: [[0.0; K]; K], order: Order::Value }
    }

    /// The local variable `index` with the given value.
    #[inline]
    pub fn variable(value: f64, index: usize, order: Order) -> Self {
        let mut a = Self::constant(value);
        a.order = order;
        if order >= Order::Gradient {
            a.grad[index] = 1.0;
        }
        a
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.value
    }

    #[inline]
    pub fn grad(&self) -> &[f64; K] {
        &self.grad
    }

    #[inline]
    pub fn hess(&self) -> &[[f64; K]; K] {
        &self.hess
    }

    #[inline]
    pub fn order(&self) -> Order {
        self.order
    }

    #[inline]
    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
    }

    /// Applies a scalar function given its value and first two derivatives at `self.value`.
    #[inline]
    fn chain(&self, f: f64, df: f64, d2f: f64) -> Self {
        let mut out = Self::constant(f);
        out.order = self.order;
        if self.order >= Order::Gradient {
            for i in 0..K {
                out.grad[i] = df * self.grad[i];
            }
        }
        if self.order == Order::Hessian {
            for i in 0..K {
                for j in i..K {
                    let h = df * self.hess[i][j] + d2f * self.grad[i] * self.grad[j];
                    out.hess[i][j] = h;
                    out.hess[j][i] = h;
                }
            }
        }
        out
    }

    /// Combines two actives through `f(a, b)` given its first partials
    /// `(da, db)` and second partials `(daa, dab, dbb)`.
    #[inline]
    fn combine(a: &Self, b: &Self, f: f64, da: f64, db: f64, daa: f64, dab: f64, dbb: f64) -> Self {
        let order = a.order.max(b.order);
        let mut out = Self::constant(f);
        out.order = order;
        if order >= Order::Gradient {
            for i in 0..K {
                out.grad[i] = da * a.grad[i] + db * b.grad[i];
            }
        }
        if order == Order::Hessian {
            for i in 0..K {
                for j in i..K {
                    let (gai, gaj, gbi, gbj) = (a.grad[i], a.grad[j], b.grad[i], b.grad[j]);
                    let h = da * a.hess[i][j]
                        + db * b.hess[i][j]
                        + daa * gai * gaj
                        + dab * (gai * gbj + gbi * gaj)
                        + dbb * gbi * gbj;
                    out.hess[i][j] = h;
                    out.hess[j][i] = h;
                }
            }
        }
        out
    }

    /// `self * s` for a passive `s`.
    #[inline]
    fn scale(&self, s: f64) -> Self {
        let mut out = *self;
        out.value *= s;
        if self.order >= Order::Gradient {
            out.grad.iter_mut().for_each(|g| *g *= s);
        }
        if self.order == Order::Hessian {
            out.hess.iter_mut().flatten().for_each(|h| *h *= s);
        }
        out
    }

    pub fn sqrt(&self) -> Self {
        let f = real::sqrt(self.value);
        let df = 0.5 / f;
        self.chain(f, df, -0.5 * df / self.value)
    }

    pub fn ln(&self) -> Self {
        let x = self.value;
        self.chain(real::ln(x), 1.0 / x, -1.0 / (x * x))
    }

    pub fn exp(&self) -> Self {
        let f = real::exp(self.value);
        self.chain(f, f, f)
    }

    pub fn powi(&self, n: i32) -> Self {
        let x = self.value;
        let nf = f64::from(n);
        let d2 = if n == 0 || n == 1 { 0.0 } else { nf * (nf - 1.0) * real::powi(x, n - 2) };
        let d1 = if n == 0 { 0.0 } else { nf * real::powi(x, n - 1) };
        self.chain(real::powi(x, n), d1, d2)
    }

    /// `self * self`, cheaper than `powi(2)`.
    pub fn sqr(&self) -> Self {
        *self * *self
    }

    pub fn sin(&self) -> Self {
        let (s, c) = (real::sin(self.value), real::cos(self.value));
        self.chain(s, c, -s)
    }

    pub fn cos(&self) -> Self {
        let (s, c) = (real::sin(self.value), real::cos(self.value));
        self.chain(c, -s, -c)
    }

    /// Absolute value; the derivative at zero is taken to be zero.
    pub fn abs(&self) -> Self {
        let sign = if self.value > 0.0 {
            1.0
        } else if self.value < 0.0 {
            -1.0
        } else {
            0.0
        };
        self.chain(real::abs(self.value), sign, 0.0)
    }

    pub fn recip(&self) -> Self {
        let x = self.value;
        let f = 1.0 / x;
        self.chain(f, -f * f, 2.0 * f * f * f)
    }
}

impl<const K: usize> fmt::Debug for Active<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Active")
            .field("value", &self.value)
            .field("grad", &self.grad)
            .field("order", &self.order)
            .finish_non_exhaustive()
    }
}

impl<const K: usize> From<f64> for Active<K> {
    fn from(value: f64) -> Self {
        Active::constant(value)
    }
}

impl<const K: usize> Default for Active<K> {
    fn default() -> Self {
        Active::constant(0.0)
    }
}

impl<const K: usize> Neg for Active<K> {
    type Output = Self;

    #[inline]
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl<const K: usize> Add for Active<K> {
    type Output = Self;

    #[inline]
    fn add(self, rhs: Self) -> Self {
        let order = self.order.max(rhs.order);
        let mut out = Self::constant(self.value + rhs.value);
        out.order = order;
        if order >= Order::Gradient {
            for i in 0..K {
                out.grad[i] = self.grad[i] + rhs.grad[i];
            }
        }
        if order == Order::Hessian {
            for i in 0..K {
                for j in i..K {
                    let h = self.hess[i][j] + rhs.hess[i][j];
                    out.hess[i][j] = h;
                    out.hess[j][i] = h;
                }
            }
        }
        out
    }
}

impl<const K: usize> Sub for Active<K> {
    type Output = Self;

    #[inline]
    fn sub(self, rhs: Self) -> Self {
        let order = self.order.max(rhs.order);
        let mut out = Self::constant(self.value - rhs.value);
        out.order = order;
        if order >= Order::Gradient {
            for i in 0..K {
                out.grad[i] = self.grad[i] - rhs.grad[i];
            }
        }
        if order == Order::Hessian {
            for i in 0..K {
                for j in i..K {
                    let h = self.hess[i][j] - rhs.hess[i][j];
                    out.hess[i][j] = h;
                    out.hess[j][i] = h;
                }
            }
        }
        out
    }
}

impl<const K: usize> Mul for Active<K> {
    type Output = Self;

    #[inline]
    fn mul(self, rhs: Self) -> Self {
        Self::combine(&self, &rhs, self.value * rhs.value, rhs.value, self.value, 0.0, 1.0, 0.0)
    }
}

impl<const K: usize> Div for Active<K> {
    type Output = Self;

    #[inline]
    fn div(self, rhs: Self) -> Self {
        let (a, b) = (self.value, rhs.value);
        let inv = 1.0 / b;
        let q = a / b;
        Self::combine(&self, &rhs, q, inv, -q * inv, 0.0, -inv * inv, 2.0 * q * inv * inv)
    }
}

impl<const K: usize> Add<f64> for Active<K> {
    type Output = Self;

    #[inline]
    fn add(mut self, rhs: f64) -> Self {
        self.value += rhs;
        self
    }
}

impl<const K: usize> Sub<f64> for Active<K> {
    type Output = Self;

    #[inline]
    fn sub(mut self, rhs: f64) -> Self {
        self.value -= rhs;
        self
    }
}

impl<const K: usize> Mul<f64> for Active<K> {
    type Output = Self;

    #[inline]
    fn mul(self, rhs: f64) -> Self {
        self.scale(rhs)
    }
}

impl<const K: usize> Div<f64> for Active<K> {
    type Output = Self;

    #[inline]
    fn div(self, rhs: f64) -> Self {
        let mut out = self;
        out.value = self.value / rhs;
        if self.order >= Order::Gradient {
            out.grad.iter_mut().for_each(|g| *g /= rhs);
        }
        if self.order == Order::Hessian {
            out.hess.iter_mut().flatten().for_each(|h| *h /= rhs);
        }
        out
    }
}

impl<const K: usize> Add<Active<K>> for f64 {
    type Output = Active<K>;

    #[inline]
    fn add(self, rhs: Active<K>) -> Active<K> {
        rhs + self
    }
}

impl<const K: usize> Sub<Active<K>> for f64 {
    type Output = Active<K>;

    #[inline]
    fn sub(self, rhs: Active<K>) -> Active<K> {
        -rhs + self
    }
}

impl<const K: usize> Mul<Active<K>> for f64 {
    type Output = Active<K>;

    #[inline]
    fn mul(self, rhs: Active<K>) -> Active<K> {
        rhs.scale(self)
    }
}

impl<const K: usize> Div<Active<K>> for f64 {
    type Output = Active<K>;

    #[inline]
    fn div(self, rhs: Active<K>) -> Active<K> {
        let f = self / rhs.value;
        let inv = 1.0 / rhs.value;
        rhs.chain(f, -f * inv, 2.0 * f * inv * inv)
    }
}

macro_rules! assign_ops {
    ($($trait:ident $method:ident $op:tt),*) => {$(
        impl<const K: usize> $trait for Active<K> {
            #[inline]
            fn $method(&mut self, rhs: Self) {
                *self = *self $op rhs;
            }
        }

        impl<const K: usize> $trait<f64> for Active<K> {
            #[inline]
            fn $method(&mut self, rhs: f64) {
                *self = *self $op rhs;
            }
        }
    )*};
}

assign_ops!(AddAssign add_assign +, SubAssign sub_assign -, MulAssign mul_assign *, DivAssign div_assign /);

impl<const K: usize> core::iter::Sum for Active<K> {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Active::constant(0.0), |acc, x| acc + x)
    }
}
