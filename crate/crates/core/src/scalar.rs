//! Scalar field abstraction and the 2x2 matrix algebra used by transfer matrices.
//!
//! Propagation runs over `f64` for real energies and over `Complex64` for the
//! strip `|Im xi| <= 1/x`; both share one code path through [`Scalar`].

use std::fmt::Debug;
use std::ops::{Add, Mul, Sub};

pub use num_complex::Complex64;
use num_complex::ComplexFloat;

use crate::tolerances::FREE_SERIES_THRESHOLD;

/// Field of spectral-parameter values: `f64` or `Complex64`.
pub trait Scalar: ComplexFloat<Real = f64> + From<f64> + Send + Sync + Debug + 'static {
    /// Embeds a real number.
    fn lift(x: f64) -> Self {
        <Self as From<f64>>::from(x)
    }

    fn to_complex(self) -> Complex64 {
        Complex64::new(self.re(), self.im())
    }
}

impl Scalar for f64 {}
impl Scalar for Complex64 {}

/// `sin(z) / z`, with the removable singularity filled by its series.
pub fn sinc<S: Scalar>(z: S) -> S {
    if z.abs() < FREE_SERIES_THRESHOLD {
        let z2 = z * z;
        S::one() - z2 / S::lift(6.0) + z2 * z2 / S::lift(120.0)
    } else {
        z.sin() / z
    }
}

/// `(cos z - sinc z) / z^2`, entire with value -1/3 at the origin.
pub(crate) fn cos_minus_sinc_over_sq<S: Scalar>(z: S) -> S {
    if z.abs() < 1e-2 {
        let z2 = z * z;
        S::lift(-1.0 / 3.0) + z2 / S::lift(30.0) - z2 * z2 / S::lift(840.0)
    } else {
        (z.cos() - sinc(z)) / (z * z)
    }
}

/// Integral of `cos(omega s)` over `[0, dx]`.
pub(crate) fn integral_cos<S: Scalar>(omega: S, dx: f64) -> S {
    sinc(omega * S::lift(dx)) * S::lift(dx)
}

/// Integral of `sin(omega s)` over `[0, dx]`, i.e. `(1 - cos(omega dx)) / omega`.
pub(crate) fn integral_sin<S: Scalar>(omega: S, dx: f64) -> S {
    let half = omega * S::lift(0.5 * dx);
    half.sin() * sinc(half) * S::lift(dx)
}

/// Dense 2x2 matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2<S>(pub [[S; 2]; 2]);

impl<S: Scalar> Mat2<S> {
    pub fn identity() -> Self {
        Mat2([[S::one(), S::zero()], [S::zero(), S::one()]])
    }

    pub fn zero() -> Self {
        Mat2([[S::zero(); 2]; 2])
    }

    pub fn from_columns(c0: [S; 2], c1: [S; 2]) -> Self {
        Mat2([[c0[0], c1[0]], [c0[1], c1[1]]])
    }

    pub fn det(&self) -> S {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn inverse(&self) -> Self {
        let m = &self.0;
        let d = self.det();
        Mat2([[m[1][1] / d, -m[0][1] / d], [-m[1][0] / d, m[0][0] / d]])
    }

    pub fn apply(&self, v: [S; 2]) -> [S; 2] {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1],
            m[1][0] * v[0] + m[1][1] * v[1],
        ]
    }

    pub fn scale(&self, s: S) -> Self {
        let m = &self.0;
        Mat2([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.0.iter().flatten().map(|e| e.abs().powi(2)).sum()
    }

    /// Spectral norm (largest singular value).
    pub fn norm(&self) -> f64 {
        let f = self.frobenius_sq();
        let d = self.det().abs();
        let disc = (f * f - 4.0 * d * d).max(0.0).sqrt();
        (0.5 * (f + disc)).sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (*self - *other)
            .0
            .iter()
            .flatten()
            .map(|e| e.abs())
            .fold(0.0, f64::max)
    }
}

impl<S: Scalar> Mul for Mat2<S> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let (a, b) = (&self.0, &rhs.0);
        let mut out = [[S::zero(); 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Mat2(out)
    }
}

impl<S: Scalar> Add for Mat2<S> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut out = self.0;
        for (row, r) in out.iter_mut().zip(rhs.0.iter()) {
            for (e, x) in row.iter_mut().zip(r.iter()) {
                *e = *e + *x;
            }
        }
        Mat2(out)
    }
}

impl<S: Scalar> Sub for Mat2<S> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + rhs.scale(-S::one())
    }
}

/// Euclidean norm of a pair of scalars.
pub fn pair_norm<S: Scalar>(v: [S; 2]) -> f64 {
    v[0].abs().hypot(v[1].abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sinc_series_matches_direct_near_threshold() {
        let z = 1.5 * FREE_SERIES_THRESHOLD;
        let series = 1.0 - z * z / 6.0 + z.powi(4) / 120.0;
        assert!((sinc(z) - series).abs() < 1e-16);
        assert_eq!(sinc(0.0), 1.0);
    }

    #[test]
    fn cos_minus_sinc_branches_agree() {
        for z in [0.009_f64, 0.011, 0.5] {
            let direct = (z.cos() - z.sin() / z) / (z * z);
            assert!((cos_minus_sinc_over_sq(z) - direct).abs() < 1e-9, "z={z}");
        }
    }

    #[test]
    fn integrals_match_closed_forms() {
        let (w, dx) = (1.7, 2.3);
        assert!((integral_cos(w, dx) - (w * dx).sin() / w).abs() < 1e-14);
        assert!((integral_sin(w, dx) - (1.0 - (w * dx).cos()) / w).abs() < 1e-14);
        assert!((integral_sin(0.0, dx)).abs() < 1e-300);
    }

    #[test]
    fn norm_of_rotation_is_one() {
        let t: f64 = 0.7;
        let r = Mat2([[t.cos(), -t.sin()], [t.sin(), t.cos()]]);
        assert!((r.norm() - 1.0).abs() < 1e-14);
        let d = Mat2([[3.0, 0.0], [0.0, 0.5]]);
        assert!((d.norm() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn inverse_roundtrip_complex() {
        let m = Mat2([
            [Complex64::new(1.0, 0.3), Complex64::new(0.2, -1.0)],
            [Complex64::new(-0.5, 0.1), Complex64::new(2.0, 0.0)],
        ]);
        let id = m * m.inverse();
        assert!(id.max_abs_diff(&Mat2::identity()) < 1e-14);
    }
}
