//! Two-by-two real matrices and boundary-data vectors.

use std::ops::Mul;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SpectralError};
use crate::scalar::Real;

/// Boundary data `(u, u')` of a solution at a position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateVector<T> {
    pub value: T,
    pub derivative: T,
    pub position: T,
}

impl<T: Real> StateVector<T> {
    pub fn new(value: T, derivative: T, position: T) -> Self {
        Self {
            value,
            derivative,
            position,
        }
    }

    pub fn pair(&self) -> [T; 2] {
        [self.value, self.derivative]
    }

    pub fn from_pair(v: [T; 2], position: T) -> Self {
        Self::new(v[0], v[1], position)
    }

    pub fn norm(&self) -> T {
        self.value.hypot(self.derivative)
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite() && self.derivative.is_finite()
    }

    /// Same state rescaled to unit euclidean norm.
    pub fn normalized(&self) -> Self {
        let n = self.norm();
        Self::new(self.value / n, self.derivative / n, self.position)
    }

    pub fn at(mut self, position: T) -> Self {
        self.position = position;
        self
    }
}

/// `u v' - u' v` for two pairs; no position check.
#[inline]
pub fn cross<T: Real>(u: [T; 2], v: [T; 2]) -> T {
    u[0] * v[1] - u[1] * v[0]
}

/// Wronskian `W[u, v] = u v' - u' v` of two states at the same position.
pub fn wronskian<T: Real>(u: &StateVector<T>, v: &StateVector<T>) -> Result<T> {
    let scale = T::one().max(u.position.abs()).max(v.position.abs());
    if (u.position - v.position).abs() > T::tol(1e-12) * scale {
        return Err(SpectralError::PositionMismatch {
            left: u.position.as_f64(),
            right: v.position.as_f64(),
        });
    }
    Ok(cross(u.pair(), v.pair()))
}

/// Row-major real 2x2 matrix acting on `(value, derivative)` columns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2<T> {
    pub m: [[T; 2]; 2],
}

impl<T: Real> Mat2<T> {
    pub fn new(a: T, b: T, c: T, d: T) -> Self {
        Self { m: [[a, b], [c, d]] }
    }

    pub fn identity() -> Self {
        Self::new(T::one(), T::zero(), T::zero(), T::one())
    }

    pub fn from_columns(c0: [T; 2], c1: [T; 2]) -> Self {
        Self::new(c0[0], c1[0], c0[1], c1[1])
    }

    pub fn det(&self) -> T {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn trace(&self) -> T {
        self.m[0][0] + self.m[1][1]
    }

    pub fn apply(&self, v: [T; 2]) -> [T; 2] {
        [
            self.m[0][0] * v[0] + self.m[0][1] * v[1],
            self.m[1][0] * v[0] + self.m[1][1] * v[1],
        ]
    }

    pub fn column(&self, j: usize) -> [T; 2] {
        [self.m[0][j], self.m[1][j]]
    }

    /// Inverse of a unimodular matrix (adjugate, no division by det).
    pub fn symplectic_inverse(&self) -> Self {
        Self::new(self.m[1][1], -self.m[0][1], -self.m[1][0], self.m[0][0])
    }

    pub fn scale(&self, s: T) -> Self {
        Self::new(
            self.m[0][0] * s,
            self.m[0][1] * s,
            self.m[1][0] * s,
            self.m[1][1] * s,
        )
    }

    pub fn frobenius(&self) -> T {
        let mut s = T::zero();
        for row in &self.m {
            for &x in row {
                s += x * x;
            }
        }
        s.sqrt()
    }

    /// Largest singular value.
    pub fn spectral_norm(&self) -> T {
        let [[a, b], [c, d]] = self.m;
        let q = (a + d).hypot(c - b);
        let r = (a - d).hypot(c + b);
        (q + r) / T::lit(2.0)
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        let mut e = T::zero();
        for i in 0..2 {
            for j in 0..2 {
                e = e.max((self.m[i][j] - other.m[i][j]).abs());
            }
        }
        e
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().flatten().all(|x| x.is_finite())
    }
}

impl<T: Real> Mul for Mat2<T> {
    type Output = Mat2<T>;

    fn mul(self, rhs: Self) -> Self {
        let a = &self.m;
        let b = &rhs.m;
        Mat2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wronskian_of_basis_and_self() {
        let u = StateVector::new(1.0, 0.0, 2.0);
        let v = StateVector::new(0.0, 1.0, 2.0);
        assert_eq!(wronskian(&u, &v).unwrap(), 1.0);
        assert_eq!(wronskian(&u, &u).unwrap(), 0.0);
    }

    #[test]
    fn wronskian_rejects_mismatched_positions() {
        let u = StateVector::new(1.0, 0.0, 2.0);
        let v = StateVector::new(0.0, 1.0, 2.5);
        assert!(matches!(
            wronskian(&u, &v),
            Err(SpectralError::PositionMismatch { .. })
        ));
    }

    #[test]
    fn spectral_norm_of_diagonal_and_rotation() {
        let d = Mat2::<f64>::new(3.0, 0.0, 0.0, 1.0 / 3.0);
        assert!((d.spectral_norm() - 3.0).abs() < 1e-14);
        let t = 0.7f64;
        let r = Mat2::<f64>::new(t.cos(), -t.sin(), t.sin(), t.cos());
        assert!((r.spectral_norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn inverse_of_unimodular() {
        let m = Mat2::<f64>::new(2.0, 3.0, 1.0, 2.0);
        let p = m * m.symplectic_inverse();
        assert!(p.max_abs_diff(&Mat2::identity()) < 1e-15);
    }
}
