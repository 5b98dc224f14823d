//! Continuum Christoffel-Darboux kernels `S_L(xi, zeta) = ∫_0^L u(xi, r) u(zeta, r) dr`.
//!
//! Three routes are kept deliberately independent so each can check the others:
//! a running quadrature carried through propagation, the off-diagonal
//! Wronskian formula, and the diagonal formula built from accumulated
//! xi-derivatives.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::potential::{PearsonPotential, TruncationLevel};
use crate::propagate::{
    free_matrix, neumann_extended, neumann_solution, rk4_linear, segments, steps_for,
    variation_coeffs, Segment, SpectralParameter,
};
use crate::scalar::{integral_cos, integral_sin, Complex64, Scalar};
use crate::tolerances::{NEAR_DIAGONAL_THRESHOLD, SINC_SERIES_THRESHOLD};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum KernelMethod {
    Quadrature,
    CdFormula,
    /// Diagonal value from the accumulated xi-derivatives of the solution.
    Accumulated,
}

impl KernelMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            KernelMethod::Quadrature => "quadrature",
            KernelMethod::CdFormula => "cd_formula",
            KernelMethod::Accumulated => "accumulated",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelEvaluation<S> {
    pub xi: S,
    pub zeta: S,
    pub length: f64,
    pub value: S,
    pub method: KernelMethod,
    /// Set when an off-diagonal request was answered by the diagonal route.
    pub near_diagonal_fallback: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Kappa {
    pub ell: TruncationLevel,
    pub xi: f64,
    pub x: f64,
    pub value: f64,
}

/// Free density of states `1 / (2 pi sqrt(xi))`.
pub fn rho(xi: f64) -> f64 {
    1.0 / (2.0 * PI * xi.sqrt())
}

/// `sinc(pi rho(xi) (b - a))`.
pub fn sine_kernel<S: Scalar>(xi: f64, a: S, b: S) -> Result<S> {
    if !(xi > 0.0) {
        return Err(Error::NonPositiveSpectral { re: xi, im: 0.0 });
    }
    let z = (b - a) * S::lift(PI * rho(xi));
    if z.abs() < SINC_SERIES_THRESHOLD {
        let z2 = z * z;
        Ok(S::one() - z2 / S::lift(6.0) + z2 * z2 / S::lift(120.0))
    } else {
        Ok(z.sin() / z)
    }
}

fn check_length(length: f64) -> Result<()> {
    if length > 0.0 && length.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveLength(length))
    }
}

/// `∫_0^dx (a cos(ks) + b sin(ks)/k)(c cos(qs) + d sin(qs)/q) ds`.
fn free_product_integral<S: Scalar>(k: S, q: S, dx: f64, [a, b]: [S; 2], [c, d]: [S; 2]) -> S {
    let half = S::lift(0.5);
    let (cm, cp) = (integral_cos(k - q, dx), integral_cos(k + q, dx));
    let (sm, sp) = (integral_sin(k - q, dx), integral_sin(k + q, dx));
    let i_cc = half * (cm + cp);
    let i_ss = half * (cm - cp);
    let i_cs = half * (sp - sm);
    let i_sc = half * (sp + sm);
    a * c * i_cc + a * d / q * i_cs + b * c / k * i_sc + b * d / (k * q) * i_ss
}

/// Quadrature route: the integral is carried as a fifth state component.
pub fn cd_quadrature<S: Scalar>(
    v: &PearsonPotential,
    xi: S,
    zeta: S,
    length: f64,
) -> Result<KernelEvaluation<S>> {
    check_length(length)?;
    let k = SpectralParameter::new(xi)?.sqrt();
    let q = SpectralParameter::new(zeta)?.sqrt();
    let settings = v.settings();
    let mut y = [S::one(), S::zero(), S::one(), S::zero(), S::zero()];
    for seg in segments(v, 0.0, length) {
        y = match seg {
            Segment::Free { from, to } => {
                let dx = to - from;
                let (p, r) = ([y[0], y[1]], [y[2], y[3]]);
                let integral = y[4] + free_product_integral(k, q, dx, p, r);
                let [u, du] = free_matrix(xi, dx).apply(p);
                let [w, dw] = free_matrix(zeta, dx).apply(r);
                [u, du, w, dw, integral]
            }
            Segment::Bump {
                amplitude, s0, s1, ..
            } => rk4_linear(
                y,
                s0,
                s1,
                steps_for(settings, s0, s1),
                |s| amplitude * v.profile().evaluate(s),
                |pot, y: &[S; 5]| {
                    let p = S::lift(pot);
                    [y[1], (p - xi) * y[0], y[3], (p - zeta) * y[2], y[0] * y[2]]
                },
                |_| {},
            ),
        };
    }
    Ok(KernelEvaluation {
        xi,
        zeta,
        length,
        value: y[4],
        method: KernelMethod::Quadrature,
        near_diagonal_fallback: false,
    })
}

fn accumulated<S: Scalar>(v: &PearsonPotential, xi: S, length: f64) -> Result<S> {
    let e = neumann_extended(v, xi, length)?;
    Ok(e.du * e.u_xi - e.du_xi * e.u)
}

fn is_near_diagonal<S: Scalar>(xi: S, zeta: S) -> bool {
    (xi - zeta).abs() < NEAR_DIAGONAL_THRESHOLD * xi.abs().max(1.0)
}

/// Off-diagonal formula `(u(xi) u'(zeta) - u(zeta) u'(xi)) / (xi - zeta)` at `L`.
///
/// Inside the near-diagonal band the diagonal route is evaluated at the
/// midpoint instead (second-order accurate by symmetry) and the result is flagged.
pub fn cd_formula<S: Scalar>(
    v: &PearsonPotential,
    xi: S,
    zeta: S,
    length: f64,
) -> Result<KernelEvaluation<S>> {
    check_length(length)?;
    if is_near_diagonal(xi, zeta) {
        let mid = (xi + zeta) * S::lift(0.5);
        return Ok(KernelEvaluation {
            xi,
            zeta,
            length,
            value: accumulated(v, mid, length)?,
            method: KernelMethod::Accumulated,
            near_diagonal_fallback: true,
        });
    }
    let p = neumann_solution(v, xi, length)?;
    let r = neumann_solution(v, zeta, length)?;
    Ok(KernelEvaluation {
        xi,
        zeta,
        length,
        value: (p.u * r.du - r.u * p.du) / (xi - zeta),
        method: KernelMethod::CdFormula,
        near_diagonal_fallback: false,
    })
}

/// `u'(xi, L) u_xi(xi, L) - u'_xi(xi, L) u(xi, L)`.
pub fn cd_diagonal(v: &PearsonPotential, xi: f64, length: f64) -> Result<KernelEvaluation<f64>> {
    check_length(length)?;
    Ok(KernelEvaluation {
        xi,
        zeta: xi,
        length,
        value: accumulated(v, xi, length)?,
        method: KernelMethod::Accumulated,
        near_diagonal_fallback: false,
    })
}

fn shifted(xi: f64, a: Complex64, length: f64) -> Result<Complex64> {
    let p = xi + a / length;
    SpectralParameter::new(p).map(|s| s.value())
}

/// `S_L` at complex points through the fast route; the real path is used when
/// both points are real.
fn kernel_at(v: &PearsonPotential, p: Complex64, q: Complex64, length: f64) -> Result<Complex64> {
    if p.im == 0.0 && q.im == 0.0 {
        let value = cd_formula(v, p.re, q.re, length)?.value;
        Ok(Complex64::new(value, 0.0))
    } else {
        Ok(cd_formula(v, p, q, length)?.value)
    }
}

/// `S_L(xi + a/L, xi + b/L) / S_L(xi, xi)` for real `xi` and complex offsets.
pub fn kernel_ratio(
    v: &PearsonPotential,
    xi: f64,
    a: Complex64,
    b: Complex64,
    length: f64,
) -> Result<Complex64> {
    check_length(length)?;
    let (p, q) = (shifted(xi, a, length)?, shifted(xi, b, length)?);
    let numerator = kernel_at(v, p, q, length)?;
    let denominator = cd_diagonal(v, xi, length)?.value;
    Ok(numerator / denominator)
}

/// `sup |kernel_ratio(xi, a, b) - sine_kernel(xi, a, b)|` over real offset pairs.
///
/// Each offset is propagated once; distinct pairs use the off-diagonal formula
/// and coinciding ones the diagonal route.
pub fn kernel_ratio_sup_error(
    v: &PearsonPotential,
    xi: f64,
    offsets: &[f64],
    length: f64,
) -> Result<f64> {
    check_length(length)?;
    let denominator = cd_diagonal(v, xi, length)?.value;
    let states = offsets
        .iter()
        .map(|&a| {
            let p = shifted(xi, Complex64::new(a, 0.0), length)?.re;
            neumann_solution(v, p, length)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut worst = 0.0_f64;
    for (i, &a) in offsets.iter().enumerate() {
        for (j, &b) in offsets.iter().enumerate().skip(i) {
            let s = if a == b {
                cd_diagonal(v, xi + a / length, length)?.value
            } else {
                let (p, q) = (&states[i], &states[j]);
                (p.u * q.du - q.u * p.du) / ((a - b) / length)
            };
            worst = worst.max((s / denominator - sine_kernel(xi, a, b)?).abs());
        }
    }
    Ok(worst)
}

/// `(|a1_tilde|^2 + |a2_tilde|^2) / 2` for the level-`ell` truncation.
pub fn kappa(v: &PearsonPotential, ell: TruncationLevel, xi: f64, x: f64) -> Result<Kappa> {
    let truncated = v.truncate(ell)?;
    let coeffs = variation_coeffs(&truncated, xi, x)?;
    Ok(Kappa {
        ell,
        xi,
        x,
        value: coeffs.kappa(),
    })
}

fn kappa_ratio_truncated(
    truncated: &PearsonPotential,
    xi: f64,
    a: Complex64,
    b: Complex64,
    x: f64,
) -> Result<(Complex64, f64)> {
    check_length(x)?;
    let (p, q) = (shifted(xi, a, x)?, shifted(xi, b, x)?);
    let s = kernel_at(truncated, p, q, x)?;
    let k = variation_coeffs(truncated, xi, x)?.kappa();
    Ok((s, k))
}

/// `S_x(xi + a/x, xi + b/x) / (x kappa_x(xi))` for the level-`ell` truncation.
pub fn kappa_ratio(
    v: &PearsonPotential,
    ell: TruncationLevel,
    xi: f64,
    a: Complex64,
    b: Complex64,
    x: f64,
) -> Result<Complex64> {
    let truncated = v.truncate(ell)?;
    let (s, k) = kappa_ratio_truncated(&truncated, xi, a, b, x)?;
    Ok(s / (x * k))
}

/// Increment between consecutive truncation levels, split along the triangle
/// inequality into a kernel part and a normalization part.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KappaGap {
    pub gap: f64,
    /// `|S^(l) - S^(l+1)| / (x kappa^(l))`
    pub s_term: f64,
    /// `|S^(l+1)| |1/kappa^(l) - 1/kappa^(l+1)| / x`
    pub kappa_term: f64,
}

/// Requires `N_{l+1} <= x <= N_{l+2}`, the upper bound dropped when bump `l+2`
/// does not exist.
pub fn kappa_ratio_gap(
    v: &PearsonPotential,
    ell: TruncationLevel,
    xi: f64,
    a: f64,
    b: f64,
    x: f64,
) -> Result<KappaGap> {
    let centers = v.centers();
    let l = ell.0;
    if l >= centers.len() {
        return Err(Error::TruncationOutOfRange {
            requested: l + 1,
            available: centers.len(),
        });
    }
    let lo = centers[l];
    let hi = centers.get(l + 1).copied().unwrap_or(f64::INFINITY);
    if !(lo..=hi).contains(&x) {
        return Err(Error::OutsideWindow { x, lo, hi });
    }
    let (a, b) = (Complex64::new(a, 0.0), Complex64::new(b, 0.0));
    let coarse = v.truncate(ell)?;
    let fine = v.truncate(TruncationLevel(l + 1))?;
    let (s0, k0) = kappa_ratio_truncated(&coarse, xi, a, b, x)?;
    let (s1, k1) = kappa_ratio_truncated(&fine, xi, a, b, x)?;
    Ok(KappaGap {
        gap: (s0 / (x * k0) - s1 / (x * k1)).norm(),
        s_term: (s0 - s1).norm() / (x * k0),
        kappa_term: s1.norm() * (1.0 / k0 - 1.0 / k1).abs() / x,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::canonical_bump;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    fn two_bumps() -> PearsonPotential {
        PearsonPotential::new(canonical_bump(), vec![0.8, 0.5], vec![10.0, 60.0]).unwrap()
    }

    #[test]
    fn sine_kernel_examples() {
        assert_eq!(sine_kernel(1.0, 0.7, 0.7).unwrap(), 1.0);
        assert!(sine_kernel(1.0, 0.0, 2.0 * PI).unwrap().abs() < 1e-15);
        assert!((rho(1.0) - 1.0 / (2.0 * PI)).abs() < 1e-17);
        assert!(sine_kernel(0.0, 0.0, 1.0).is_err());
        let c = sine_kernel(2.0, Complex64::new(0.1, 0.5), Complex64::new(-0.3, 0.2)).unwrap();
        let z = Complex64::new(-0.4, -0.3) * PI * rho(2.0);
        assert!((c - z.sin() / z).norm() < 1e-15);
    }

    #[test]
    fn free_quadrature_closed_forms() {
        let v = PearsonPotential::zero();
        for &l in &[0.3, 7.0, 250.0] {
            let diag = cd_quadrature(&v, 1.0, 1.0, l).unwrap().value;
            assert!(rel(diag, l / 2.0 + (2.0 * l).sin() / 4.0) < 1e-12);
            let off = cd_quadrature(&v, 1.0, 4.0, l).unwrap().value;
            let exact = ((3.0 * l).sin() / 3.0 + l.sin()) / 2.0;
            assert!((off - exact).abs() < 1e-12 * l, "L={l}");
        }
        assert!(matches!(
            cd_quadrature(&v, 1.0, 1.0, 0.0),
            Err(Error::NonPositiveLength(_))
        ));
    }

    #[test]
    fn free_formula_and_diagonal() {
        let v = PearsonPotential::zero();
        assert!(cd_formula(&v, 1.0, 4.0, PI).unwrap().value.abs() < 1e-15);
        for &l in &[1.0, 33.3] {
            let d = cd_diagonal(&v, 1.0, l).unwrap().value;
            assert!(rel(d, l / 2.0 + (2.0 * l).sin() / 4.0) < 1e-12);
        }
        let v = two_bumps();
        let f = cd_formula(&v, 1.0, 1.3, 80.0).unwrap().value;
        let g = cd_formula(&v, 1.3, 1.0, 80.0).unwrap().value;
        assert_eq!(f, g);
    }

    #[test]
    fn quadrature_matches_formula_with_bumps() {
        let v = two_bumps();
        for &(xi, zeta, l) in &[(1.0, 1.1, 200.0), (1.0, 1.05, 500.0), (0.5, 2.0, 61.5)] {
            let q = cd_quadrature(&v, xi, zeta, l).unwrap().value;
            let f = cd_formula(&v, xi, zeta, l).unwrap().value;
            assert!(rel(q, f) < 1e-8, "{xi} {zeta} {l}: {q} vs {f}");
        }
        let z = Complex64::new(1.2, 0.01);
        let w = Complex64::new(0.9, -0.02);
        let q = cd_quadrature(&v, z, w, 100.0).unwrap().value;
        let f = cd_formula(&v, z, w, 100.0).unwrap().value;
        assert!((q - f).norm() < 1e-8 * f.norm());
    }

    #[test]
    fn near_diagonal_fallback_is_flagged() {
        let v = two_bumps();
        let e = cd_formula(&v, 1.0, 1.0 + 1e-10, 100.0).unwrap();
        assert!(e.near_diagonal_fallback);
        assert_eq!(e.method, KernelMethod::Accumulated);
        let d = cd_diagonal(&v, 1.0, 100.0).unwrap().value;
        assert!(rel(e.value, d) < 1e-8);
    }

    #[test]
    fn kernel_ratio_basics() {
        let v = two_bumps();
        let zero = Complex64::new(0.0, 0.0);
        let r = kernel_ratio(&v, 1.0, zero, zero, 120.0).unwrap();
        assert!((r - 1.0).norm() < 1e-9);
        let (a, b) = (Complex64::new(0.5, 0.3), Complex64::new(-1.0, 0.7));
        let r = kernel_ratio(&v, 1.0, a, b, 120.0).unwrap();
        let rc = kernel_ratio(&v, 1.0, a.conj(), b.conj(), 120.0).unwrap();
        assert!((r.conj() - rc).norm() < 1e-12);
        assert!(kernel_ratio(&v, 0.01, Complex64::new(-5.0, 0.0), zero, 100.0).is_err());
    }

    #[test]
    fn free_kernel_ratio_approaches_sinc() {
        let v = PearsonPotential::zero();
        let mut sup = 0.0_f64;
        for i in 0..=8 {
            for j in 0..=8 {
                let a = -2.0 + 0.5 * i as f64;
                let b = -2.0 + 0.5 * j as f64;
                let r = kernel_ratio(&v, 1.0, a.into(), b.into(), 1e4).unwrap();
                sup = sup.max((r.re - sine_kernel(1.0, a, b).unwrap()).abs());
            }
        }
        assert!(sup < 1e-2, "{sup}");
    }

    #[test]
    fn sup_error_matches_pointwise_ratios() {
        let v = two_bumps();
        let offsets = [-1.5, 0.0, 0.75];
        let sup = kernel_ratio_sup_error(&v, 1.2, &offsets, 150.0).unwrap();
        let mut worst = 0.0_f64;
        for &a in &offsets {
            for &b in &offsets {
                let r = kernel_ratio(
                    &v,
                    1.2,
                    Complex64::new(a, 0.0),
                    Complex64::new(b, 0.0),
                    150.0,
                )
                .unwrap();
                worst = worst.max((r.re - sine_kernel(1.2, a, b).unwrap()).abs());
            }
        }
        assert!((sup - worst).abs() < 1e-9, "{sup} vs {worst}");
    }

    #[test]
    fn kappa_examples() {
        let v = PearsonPotential::zero();
        assert!((kappa(&v, TruncationLevel(0), 1.7, 42.0).unwrap().value - 0.5).abs() < 1e-13);
        let v = two_bumps();
        let k1 = kappa(&v, TruncationLevel(1), 1.2, 11.0).unwrap().value;
        let k2 = kappa(&v, TruncationLevel(1), 1.2, 1000.0).unwrap().value;
        assert!(k1 > 0.0 && rel(k1, k2) < 1e-10);
        let r = kappa_ratio(
            &PearsonPotential::zero(),
            TruncationLevel(0),
            1.0,
            1.0.into(),
            (-1.0).into(),
            1e3,
        )
        .unwrap();
        assert!((r.re - sine_kernel(1.0, 1.0, -1.0).unwrap()).abs() < 1e-2);
    }

    #[test]
    fn kappa_gap_vanishes_for_zero_amplitude() {
        let v = PearsonPotential::new(canonical_bump(), vec![0.5, 0.0], vec![10.0, 50.0]).unwrap();
        let g = kappa_ratio_gap(&v, TruncationLevel(1), 1.0, 0.5, -0.5, 80.0).unwrap();
        assert_eq!(g.gap, 0.0);
        assert!(matches!(
            kappa_ratio_gap(&v, TruncationLevel(1), 1.0, 0.5, -0.5, 20.0),
            Err(Error::OutsideWindow { .. })
        ));
        assert!(kappa_ratio_gap(&v, TruncationLevel(2), 1.0, 0.5, -0.5, 80.0).is_err());
    }

    #[test]
    fn kappa_gap_triangle_split_and_linearity() {
        let base =
            PearsonPotential::new(canonical_bump(), vec![0.5, 1e-2], vec![10.0, 50.0]).unwrap();
        let g2 = kappa_ratio_gap(&base, TruncationLevel(1), 1.0, 0.7, -0.4, 300.0).unwrap();
        assert!(g2.s_term + g2.kappa_term >= g2.gap);
        let small = base.with_amplitude(1, 1e-3).unwrap();
        let g3 = kappa_ratio_gap(&small, TruncationLevel(1), 1.0, 0.7, -0.4, 300.0).unwrap();
        let spread = (g2.gap / 1e-2) / (g3.gap / 1e-3);
        assert!((spread - 1.0).abs() < 0.2, "{spread}");
    }
}
