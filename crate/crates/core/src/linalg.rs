//! Fixed-size 2×2 real matrices.

use std::ops::{Index, Mul, Sub};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::Real;

/// Row-major 2×2 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2<T>(pub [[T; 2]; 2]);

impl<T: Real> Mat2<T> {
    pub fn new(a: T, b: T, c: T, d: T) -> Self {
        Self([[a, b], [c, d]])
    }

    pub fn identity() -> Self {
        Self::new(T::one(), T::zero(), T::zero(), T::one())
    }

    pub fn trace(&self) -> T {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> T {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    /// Similarity transform `S⁻¹ A S` with `S = diag(s0, s1)`.
    pub fn conjugate_diag(&self, s0: T, s1: T) -> Self {
        let m = &self.0;
        Self::new(m[0][0], m[0][1] * s1 / s0, m[1][0] * s0 / s1, m[1][1])
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        let mut worst = T::zero();
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((self.0[i][j] - other.0[i][j]).abs());
            }
        }
        worst
    }

    /// Eigenvalues from the characteristic polynomial. A real pair is returned in
    /// descending order; a complex pair as `(μ + iν, μ - iν)` with `ν > 0`.
    pub fn eigenvalues(&self) -> [Complex<T>; 2] {
        let half_tr = self.trace() / T::lit(2.0);
        let disc = half_tr * half_tr - self.det();
        if disc >= T::zero() {
            let root = disc.sqrt();
            // Avoid cancellation in the smaller root.
            let big = if half_tr >= T::zero() { half_tr + root } else { half_tr - root };
            let small = if big != T::zero() { self.det() / big } else { T::zero() };
            let (hi, lo) = if big >= small { (big, small) } else { (small, big) };
            [Complex::new(hi, T::zero()), Complex::new(lo, T::zero())]
        } else {
            let nu = (-disc).sqrt();
            [Complex::new(half_tr, nu), Complex::new(half_tr, -nu)]
        }
    }
}

impl<T> Index<(usize, usize)> for Mat2<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.0[i][j]
    }
}

impl<T: Real> Mul for Mat2<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let (a, b) = (&self.0, &rhs.0);
        Self::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

impl<T: Real> Sub for Mat2<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let (a, b) = (&self.0, &rhs.0);
        Self::new(
            a[0][0] - b[0][0],
            a[0][1] - b[0][1],
            a[1][0] - b[1][0],
            a[1][1] - b[1][1],
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_has_unit_imaginary_pair() {
        let m = Mat2::new(0.0f64, -1.0, 1.0, 0.0);
        let ev = m.eigenvalues();
        assert!((ev[0].re).abs() < 1e-15 && (ev[0].im - 1.0).abs() < 1e-15);
        assert_eq!(ev[1], ev[0].conj());
    }

    #[test]
    fn real_pair_product_and_sum() {
        let m = Mat2::new(1.0f64, 2.0, 0.5, -0.3);
        let ev = m.eigenvalues();
        assert!((ev[0].re * ev[1].re - m.det()).abs() < 1e-14);
        assert!((ev[0].re + ev[1].re - m.trace()).abs() < 1e-14);
        assert!(ev[0].re >= ev[1].re);
    }

    #[test]
    fn tiny_eigenvalue_keeps_relative_accuracy() {
        let m = Mat2::new(1.0f64, 0.0, 0.0, 1e-14);
        let ev = m.eigenvalues();
        assert!((ev[1].re - 1e-14).abs() < 1e-28);
    }
}
