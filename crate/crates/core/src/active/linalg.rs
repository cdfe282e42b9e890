//! Small fixed-size vectors and matrices over plain or active scalars.

use core::ops::{Add, Div, Index, IndexMut, Mul, Neg, Sub};

use super::Active;
use crate::real;

/// Arithmetic shared by `f64` and [`Active`], so geometric helpers can be
/// written once and used for both passive and active inputs.
pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn from_f64(v: f64) -> Self;
    fn value(&self) -> f64;
    fn sqrt(&self) -> Self;
}

impl Scalar for f64 {
    #[inline]
    fn from_f64(v: f64) -> Self {
        v
    }

    #[inline]
    fn value(&self) -> f64 {
        *self
    }

    #[inline]
    fn sqrt(&self) -> Self {
        real::sqrt(*self)
    }
}

impl<const K: usize> Scalar for Active<K> {
    #[inline]
    fn from_f64(v: f64) -> Self {
        Active::constant(v)
    }

    #[inline]
    fn value(&self) -> f64 {
        self.value
    }

    #[inline]
    fn sqrt(&self) -> Self {
        Active::sqrt(self)
    }
}

/// Fixed-length vector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vector<T, const D: usize>(pub [T; D]);

/// Vector of active scalars, e.g. a lifted vertex position.
pub type ActiveVec<const K: usize, const D: usize> = Vector<Active<K>, D>;

impl<T: Scalar, const D: usize> Vector<T, D> {
    pub fn zeros() -> Self {
        Vector([T::from_f64(0.0); D])
    }

    pub fn from_f64(v: [f64; D]) -> Self {
        Vector(v.map(T::from_f64))
    }

    pub fn dot(&self, other: &Self) -> T {
        let mut acc = self.0[0] * other.0[0];
        for i in 1..D {
            acc = acc + self.0[i] * other.0[i];
        }
        acc
    }

    pub fn squared_norm(&self) -> T {
        self.dot(self)
    }

    pub fn norm(&self) -> T {
        self.squared_norm().sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        Vector(self.0.map(|c| c / n))
    }

    pub fn scale(&self, s: T) -> Self {
        Vector(self.0.map(|c| c * s))
    }

    pub fn values(&self) -> [f64; D] {
        self.0.map(|c| c.value())
    }
}

impl<T: Scalar> Vector<T, 3> {
    pub fn cross(&self, o: &Self) -> Self {
        let [a0, a1, a2] = self.0;
        let [b0, b1, b2] = o.0;
        Vector([a1 * b2 - a2 * b1, a2 * b0 - a0 * b2, a0 * b1 - a1 * b0])
    }
}

impl<T: Scalar, const D: usize> Add for Vector<T, D> {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        Vector(core::array::from_fn(|i| self.0[i] + rhs.0[i]))
    }
}

impl<T: Scalar, const D: usize> Sub for Vector<T, D> {
    type Output = Self;

    fn sub(self, rhs: Self) -> Self {
        Vector(core::array::from_fn(|i| self.0[i] - rhs.0[i]))
    }
}

impl<T, const D: usize> Index<usize> for Vector<T, D> {
    type Output = T;

    fn index(&self, i: usize) -> &T {
        &self.0[i]
    }
}

impl<T, const D: usize> IndexMut<usize> for Vector<T, D> {
    fn index_mut(&mut self, i: usize) -> &mut T {
        &mut self.0[i]
    }
}

/// Dense `R x C` matrix stored row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmallMatrix<T, const R: usize, const C: usize>(pub [[T; C]; R]);

impl<T: Scalar, const R: usize, const C: usize> SmallMatrix<T, R, C> {
    pub fn from_columns(cols: [Vector<T, R>; C]) -> Self {
        SmallMatrix(core::array::from_fn(|r| core::array::from_fn(|c| cols[c].0[r])))
    }

    pub fn transpose(&self) -> SmallMatrix<T, C, R> {
        SmallMatrix(core::array::from_fn(|r| core::array::from_fn(|c| self.0[c][r])))
    }

    pub fn matmul<const P: usize>(&self, rhs: &SmallMatrix<T, C, P>) -> SmallMatrix<T, R, P> {
        SmallMatrix(core::array::from_fn(|r| {
            core::array::from_fn(|p| {
                let mut acc = self.0[r][0] * rhs.0[0][p];
                for k in 1..C {
                    acc = acc + self.0[r][k] * rhs.0[k][p];
                }
                acc
            })
        }))
    }

    /// Product with a passive matrix, e.g. an active deformation times a
    /// constant rest-shape inverse.
    pub fn matmul_passive<const P: usize>(&self, rhs: &SmallMatrix<f64, C, P>) -> SmallMatrix<T, R, P> {
        SmallMatrix(core::array::from_fn(|r| {
            core::array::from_fn(|p| {
                let mut acc = self.0[r][0] * rhs.0[0][p];
                for k in 1..C {
                    acc = acc + self.0[r][k] * rhs.0[k][p];
                }
                acc
            })
        }))
    }

    pub fn frobenius_sq(&self) -> T {
        let mut acc = T::from_f64(0.0);
        for row in &self.0 {
            for &v in row {
                acc = acc + v * v;
            }
        }
        acc
    }

    pub fn values(&self) -> [[f64; C]; R] {
        self.0.map(|row| row.map(|v| v.value()))
    }
}

impl<T: Scalar, const D: usize> SmallMatrix<T, D, D> {
    pub fn identity() -> Self {
        SmallMatrix(core::array::from_fn(|r| core::array::from_fn(|c| T::from_f64(if r == c { 1.0 } else { 0.0 }))))
    }
}

impl<T: Scalar> SmallMatrix<T, 2, 2> {
    pub fn determinant(&self) -> T {
        let [[a, b], [c, d]] = self.0;
        a * d - b * c
    }

    /// Inverse via the adjugate, returned together with the determinant.
    /// A zero determinant yields non-finite entries.
    pub fn inverse_det(&self) -> (Self, T) {
        let [[a, b], [c, d]] = self.0;
        let det = self.determinant();
        (SmallMatrix([[d / det, -b / det], [-c / det, a / det]]), det)
    }
}

impl<T: Scalar> SmallMatrix<T, 3, 3> {
    pub fn determinant(&self) -> T {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::active::{lift, Order};

    #[test]
    fn passive_identity_inverse() {
        let id = SmallMatrix::<Active<2>, 2, 2>::identity();
        let (inv, det) = id.inverse_det();
        assert_eq!(det.value(), 1.0);
        assert_eq!(inv.values(), [[1.0, 0.0], [0.0, 1.0]]);
    }

    #[test]
    fn unit_parallelepiped_has_unit_det() {
        let e: [Vector<f64, 3>; 3] = [Vector([1.0, 0.0, 0.0]), Vector([0.0, 1.0, 0.0]), Vector([0.0, 0.0, 1.0])];
        assert_eq!(SmallMatrix::from_columns(e).determinant(), 1.0);
    }

    #[test]
    fn det_slope_on_diagonal_entry() {
        let [x] = lift([2.0], Order::Hessian);
        let one = Active::constant(1.0);
        let zero = Active::constant(0.0);
        let m = SmallMatrix([[x, zero], [zero, one]]);
        let det = m.determinant();
        assert_eq!(det.value(), 2.0);
        assert_eq!(det.grad()[0], 1.0);
    }

    #[test]
    fn inverse_times_matrix_is_identity() {
        let m = SmallMatrix([[3.0, -1.25], [0.5, 2.0]]);
        let (inv, _) = m.inverse_det();
        let p = inv.matmul(&m);
        for r in 0..2 {
            for c in 0..2 {
                let expected = if r == c { 1.0 } else { 0.0 };
                assert!((p.0[r][c] - expected).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn cross_is_orthogonal() {
        let a = Vector([1.0, 2.0, 3.0]);
        let b = Vector([-0.5, 4.0, 1.0]);
        let c = a.cross(&b);
        assert!(c.dot(&a).abs() < 1e-12);
        assert!(c.dot(&b).abs() < 1e-12);
    }
}
