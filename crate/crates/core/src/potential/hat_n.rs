//! Empirical search for the length beyond which a truncated potential's
//! kappa-normalized kernel stays close to the sine kernel.

use rayon::prelude::*;

use super::{PearsonPotential, TruncationLevel};
use crate::error::{Error, Result};
use crate::kernel::{cd_diagonal, sine_kernel};
use crate::propagate::{neumann_solution, variation_coeffs};

/// Grid configuration for [`empirical_hat_n`].
#[derive(Clone, Debug, PartialEq)]
pub struct HatNSearch {
    pub xi_points: usize,
    /// Points per axis on `[-ab_bound, ab_bound]`.
    pub ab_points: usize,
    pub first_length: f64,
    pub length_ratio: f64,
    /// A candidate `x` must also pass at every trial length up to `horizon * x`.
    pub horizon: f64,
    pub max_length: f64,
}

impl Default for HatNSearch {
    fn default() -> Self {
        Self {
            xi_points: 17,
            ab_points: 9,
            first_length: 10.0,
            length_ratio: 2.0,
            horizon: 4.0,
            max_length: 1e5,
        }
    }
}

impl HatNSearch {
    fn validate(&self) -> Result<()> {
        let ok = self.xi_points >= 1
            && self.ab_points >= 1
            && self.first_length > 0.0
            && self.length_ratio > 1.0
            && self.horizon >= 1.0
            && self.max_length >= self.first_length;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "invalid search grid {self:?}"
            )))
        }
    }

    fn trial_lengths(&self, upto: f64) -> Vec<f64> {
        let mut out = vec![self.first_length];
        while let Some(&x) = out.last() {
            let next = x * self.length_ratio;
            if next > upto * (1.0 + 1e-12) {
                break;
            }
            out.push(next);
        }
        out
    }
}

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Sup over the (a, b) grid of |S_x(xi + a/x, xi + b/x) / (x kappa) - sinc| at one (xi, x).
///
/// States are propagated once per distinct offset and paired by the
/// off-diagonal formula; coinciding offsets use the diagonal route.
fn sup_error(v: &PearsonPotential, xi: f64, x: f64, offsets: &[f64]) -> Result<f64> {
    let kappa = variation_coeffs(v, xi, x)?.kappa();
    let states = offsets
        .iter()
        .map(|&a| neumann_solution(v, xi + a / x, x))
        .collect::<Result<Vec<_>>>()?;
    let mut worst = 0.0_f64;
    for (i, &a) in offsets.iter().enumerate() {
        for (j, &b) in offsets.iter().enumerate().skip(i) {
            let s = if i == j {
                cd_diagonal(v, xi + a / x, x)?.value
            } else {
                let (p, q) = (&states[i], &states[j]);
                (p.u * q.du - q.u * p.du) / ((a - b) / x)
            };
            let err = (s / (x * kappa) - sine_kernel(xi, a, b)?).abs();
            worst = worst.max(err);
        }
    }
    Ok(worst)
}

/// Smallest trial length `x` such that the kappa-normalized kernel of the
/// level-`ell` truncation is within `tolerance` of the sine kernel on the
/// grid, at `x` and at every trial length up to `horizon * x`.
pub fn empirical_hat_n(
    v: &PearsonPotential,
    ell: TruncationLevel,
    tolerance: f64,
    window: (f64, f64),
    ab_bound: f64,
    search: &HatNSearch,
) -> Result<f64> {
    search.validate()?;
    if !(tolerance > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance {tolerance} must be positive"
        )));
    }
    let (lo, hi) = window;
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "window [{lo}, {hi}] must lie in (0, inf)"
        )));
    }
    let truncated = v.truncate(ell)?;
    let xis = grid(lo, hi, search.xi_points);
    let offsets = grid(-ab_bound.abs(), ab_bound.abs(), search.ab_points);
    let candidates = search.trial_lengths(search.max_length);
    let all = search.trial_lengths(search.max_length * search.horizon);

    let mut passes: Vec<Option<bool>> = vec![None; all.len()];
    let mut check = |k: usize| -> Result<bool> {
        if let Some(p) = passes[k] {
            return Ok(p);
        }
        let x = all[k];
        // Offsets that leave the right half-plane cannot satisfy the criterion.
        if lo - ab_bound.abs() / x <= 0.0 {
            passes[k] = Some(false);
            return Ok(false);
        }
        let errors = xis
            .par_iter()
            .map(|&xi| sup_error(&truncated, xi, x, &offsets))
            .collect::<Result<Vec<_>>>()?;
        let ok = errors.iter().all(|&e| e < tolerance);
        passes[k] = Some(ok);
        Ok(ok)
    };
    'candidate: for (k, &x) in candidates.iter().enumerate() {
        let limit = x * search.horizon * (1.0 + 1e-12);
        for (j, &y) in all.iter().enumerate().skip(k) {
            if y > limit {
                break;
            }
            if !check(j)? {
                continue 'candidate;
            }
        }
        return Ok(x);
    }
    Err(Error::HatNNotFound {
        max_length: search.max_length,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Closed-form free kernel `∫_0^x cos(kr) cos(qr) dr` divided by `x/2`.
    fn free_ratio(xi: f64, a: f64, b: f64, x: f64) -> f64 {
        let (k, q) = ((xi + a / x).sqrt(), (xi + b / x).sqrt());
        let s = if a == b {
            x / 2.0 + (2.0 * k * x).sin() / (4.0 * k)
        } else {
            0.5 * (((k - q) * x).sin() / (k - q) + ((k + q) * x).sin() / (k + q))
        };
        s / (x / 2.0)
    }

    fn free_hat_n(tol: f64, s: &HatNSearch) -> Option<f64> {
        let xis = grid(0.5, 2.0, s.xi_points);
        let ab = grid(-1.0, 1.0, s.ab_points);
        let passes = |x: f64| {
            0.5 - 1.0 / x > 0.0
                && xis.iter().all(|&xi| {
                    ab.iter().all(|&a| {
                        ab.iter().all(|&b| {
                            let z = (b - a) / (2.0 * xi.sqrt());
                            let sinc = if z == 0.0 { 1.0 } else { z.sin() / z };
                            (free_ratio(xi, a, b, x) - sinc).abs() < tol
                        })
                    })
                })
        };
        let all = s.trial_lengths(s.max_length * s.horizon);
        s.trial_lengths(s.max_length).into_iter().find(|&x| {
            all.iter()
                .filter(|&&y| y >= x && y <= x * s.horizon * (1.0 + 1e-12))
                .all(|&y| passes(y))
        })
    }

    #[test]
    fn free_search_matches_closed_form() {
        let s = HatNSearch {
            first_length: 1.0,
            max_length: 1e3,
            ..HatNSearch::default()
        };
        let v = PearsonPotential::zero();
        for tol in [0.5, 0.1, 0.02] {
            let got = empirical_hat_n(&v, TruncationLevel(0), tol, (0.5, 2.0), 1.0, &s).unwrap();
            assert_eq!(Some(got), free_hat_n(tol, &s), "tol={tol}");
        }
    }

    #[test]
    fn loose_tolerance_returns_first_length() {
        let v =
            PearsonPotential::new(super::super::canonical_bump(), vec![0.5], vec![10.0]).unwrap();
        let s = HatNSearch::default();
        let got = empirical_hat_n(&v, TruncationLevel(1), 10.0, (0.5, 2.0), 2.0, &s).unwrap();
        assert_eq!(got, s.first_length);
    }

    #[test]
    fn tighter_tolerance_never_shrinks() {
        let v =
            PearsonPotential::new(super::super::canonical_bump(), vec![0.5], vec![10.0]).unwrap();
        let s = HatNSearch {
            xi_points: 5,
            max_length: 2e3,
            ..HatNSearch::default()
        };
        let loose = empirical_hat_n(&v, TruncationLevel(1), 0.3, (0.5, 2.0), 2.0, &s).unwrap();
        let tight = empirical_hat_n(&v, TruncationLevel(1), 0.1, (0.5, 2.0), 2.0, &s).unwrap();
        assert!(tight >= loose);
        let impossible = empirical_hat_n(&v, TruncationLevel(1), 1e-9, (0.5, 2.0), 2.0, &s);
        assert!(matches!(impossible, Err(Error::HatNNotFound { .. })));
    }
}
