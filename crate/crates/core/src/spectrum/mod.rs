//! Neumann eigenvalues of the restricted operator on `[0, L]`.
//!
//! Counting uses the scaled Prüfer angle `theta = atan2(sqrt(xi) u, u')`,
//! which starts at `pi/2`, advances by exactly `sqrt(xi) dx` across free gaps
//! and equals `pi/2 (mod pi)` precisely when `u'(L) = 0`.

mod oracle;

pub use oracle::{oracle_eigenvalues, oracle_matrix_eigenvalues};

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::rho;
use crate::potential::PearsonPotential;
use crate::propagate::{
    free_matrix, neumann_extended, rk4_linear, schrodinger_rhs, segments, steps_for, Segment,
};
use crate::tolerances::{EIGENVALUE_REL_TOL, PHASE_TIE_TOL, ROOT_RESIDUAL};

fn check_energy(xi: f64) -> Result<()> {
    if xi > 0.0 && xi.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveSpectral { re: xi, im: 0.0 })
    }
}

fn check_length(length: f64) -> Result<()> {
    if length > 0.0 && length.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveLength(length))
    }
}

/// Wraps an angle difference into `(-pi, pi]`.
fn wrap(d: f64) -> f64 {
    d - 2.0 * PI * ((d + PI) / (2.0 * PI)).ceil() + 2.0 * PI
}

/// `atan2(k u, u') - atan2(u, u')`, which lies in `(-pi/2, pi/2)` for `k > 0`.
fn scaling_offset(k: f64, u: f64, du: f64) -> f64 {
    wrap((k * u).atan2(du) - u.atan2(du))
}

#[derive(Clone, Copy, Debug)]
struct Shot {
    theta: f64,
    du: f64,
}

fn shoot(v: &PearsonPotential, xi: f64, length: f64) -> Shot {
    let k = xi.sqrt();
    let settings = v.settings();
    let (mut u, mut du, mut theta) = (1.0, 0.0, FRAC_PI_2);
    for seg in segments(v, 0.0, length) {
        match seg {
            Segment::Free { from, to } => {
                [u, du] = free_matrix(xi, to - from).apply([u, du]);
                theta += k * (to - from);
            }
            Segment::Bump {
                amplitude, s0, s1, ..
            } => {
                // Unscaled angle, unwrapped step by step; each RK4 step turns it by far less than pi.
                let mut phi = theta - scaling_offset(k, u, du);
                let mut raw = u.atan2(du);
                [u, du] = rk4_linear(
                    [u, du],
                    s0,
                    s1,
                    steps_for(settings, s0, s1),
                    |s| amplitude * v.profile().evaluate(s),
                    schrodinger_rhs(xi),
                    |y| {
                        let next = y[0].atan2(y[1]);
                        phi += wrap(next - raw);
                        raw = next;
                    },
                );
                theta = phi + scaling_offset(k, u, du);
            }
        }
    }
    Shot { theta, du }
}

/// Scaled Prüfer angle at `L`; `theta(xi, 0) = pi/2`.
pub fn phase(v: &PearsonPotential, xi: f64, length: f64) -> Result<f64> {
    check_energy(xi)?;
    if length < 0.0 {
        return Err(Error::NegativePosition(length));
    }
    Ok(shoot(v, xi, length).theta)
}

fn count_from_phase(theta: f64) -> usize {
    (((theta - FRAC_PI_2) / PI).floor() + 1.0).max(0.0) as usize
}

/// Number of Neumann eigenvalues of the restricted operator that are `<= xi`.
pub fn eigenvalue_count(v: &PearsonPotential, xi: f64, length: f64) -> Result<usize> {
    check_length(length)?;
    Ok(count_from_phase(phase(v, xi, length)?))
}

/// Eigenvalues reindexed around a reference energy so that
/// `xi_{-1} < xi_star <= xi_0`.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenvalueWindow {
    pub length: f64,
    pub xi_star: f64,
    /// `(n, xi_n)` in increasing order.
    pub values: Vec<(i64, f64)>,
    /// Global index (from the bottom of the spectrum) of `xi_0`.
    pub zero_index: usize,
    /// Set when requested indices fell below the bottom of the spectrum.
    pub truncated: bool,
}

impl EigenvalueWindow {
    pub fn get(&self, n: i64) -> Option<f64> {
        self.values.iter().find(|(m, _)| *m == n).map(|&(_, x)| x)
    }
}

/// Locates the global eigenvalue `j`, i.e. where `theta = pi/2 + j pi`.
fn locate(
    v: &PearsonPotential,
    length: f64,
    j: usize,
    xi_star: f64,
    theta_star: f64,
) -> Result<f64> {
    let target = FRAC_PI_2 + j as f64 * PI;
    // Free rate d theta / d xi = L / (2 sqrt(xi)).
    let rate = length / (2.0 * xi_star.sqrt());
    let spacing = PI / rate;
    let floor = 1e-12 * xi_star;
    let (mut lo, mut hi);
    if theta_star < target {
        lo = xi_star;
        let mut step = (target - theta_star) / rate + spacing;
        hi = xi_star + step;
        while shoot(v, hi, length).theta < target {
            lo = hi;
            step *= 2.0;
            hi += step;
            if !hi.is_finite() {
                return Err(Error::Eigenvalue(format!("no upper bracket for index {j}")));
            }
        }
    } else {
        hi = xi_star;
        let mut step = (theta_star - target) / rate + spacing;
        lo = (xi_star - step).max(floor);
        while shoot(v, lo, length).theta > target {
            if lo <= floor {
                return Err(Error::Eigenvalue(format!(
                    "index {j} lies below xi = {floor:e}"
                )));
            }
            hi = lo;
            step *= 2.0;
            lo = (lo - step).max(floor);
        }
    }
    // Shrink until the bracket spans less than pi of phase: then u' has one simple zero inside.
    while shoot(v, hi, length).theta - shoot(v, lo, length).theta >= PI {
        let mid = 0.5 * (lo + hi);
        if shoot(v, mid, length).theta < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    refine(v, length, lo, hi)
}

/// Safeguarded Newton on `u'(xi, L)` with the derivative from the variational system.
fn refine(v: &PearsonPotential, length: f64, mut lo: f64, mut hi: f64) -> Result<f64> {
    let f_lo = shoot(v, lo, length).du;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    let sign_lo = f_lo.signum();
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let e = neumann_extended(v, x, length)?;
        let scale = (x.sqrt() * e.u).hypot(e.du);
        let f = e.du;
        let converged_residual = f.abs() <= ROOT_RESIDUAL * scale;
        if f.signum() == sign_lo {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - f / e.du_xi;
        let next = if e.du_xi != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let step = (next - x).abs();
        if converged_residual && step <= EIGENVALUE_REL_TOL * x {
            return Ok(x);
        }
        if hi - lo <= 4.0 * f64::EPSILON * x {
            return Ok(x);
        }
        x = next;
    }
    Err(Error::Eigenvalue(format!(
        "refinement did not converge in [{lo}, {hi}]"
    )))
}

/// Eigenvalues `xi_n` for `n` in `[n_min, n_max]` around `xi_star`.
pub fn eigenvalues_near(
    v: &PearsonPotential,
    length: f64,
    xi_star: f64,
    n_min: i64,
    n_max: i64,
) -> Result<EigenvalueWindow> {
    check_energy(xi_star)?;
    check_length(length)?;
    if n_min > n_max {
        return Err(Error::InvalidArgument(format!(
            "empty index window [{n_min}, {n_max}]"
        )));
    }
    let theta_star = shoot(v, xi_star, length).theta;
    let t = (theta_star - FRAC_PI_2) / PI;
    let tie = (t - t.round()).abs() < PHASE_TIE_TOL;
    let zero = if tie { t.round() } else { t.ceil() }.max(0.0) as i64;
    let wanted: Vec<(i64, usize)> = (n_min..=n_max)
        .filter_map(|n| usize::try_from(zero + n).ok().map(|j| (n, j)))
        .collect();
    let truncated = wanted.len() as i64 != n_max - n_min + 1;
    let mut values = wanted
        .par_iter()
        .map(|&(n, j)| locate(v, length, j, xi_star, theta_star).map(|x| (n, x)))
        .collect::<Result<Vec<_>>>()?;
    if tie {
        if let Some(entry) = values.iter_mut().find(|(n, _)| *n == 0) {
            entry.1 = entry.1.max(xi_star);
        }
    }
    if values.windows(2).any(|w| w[1].1 <= w[0].1) {
        return Err(Error::Eigenvalue(
            "eigenvalues not strictly increasing".into(),
        ));
    }
    Ok(EigenvalueWindow {
        length,
        xi_star,
        values,
        zero_index: zero as usize,
        truncated,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClockSpacing {
    pub n: i64,
    pub spacing: f64,
    /// `L (xi_{n+1} - xi_n) rho(xi_star)`
    pub statistic: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClockReport {
    pub window: EigenvalueWindow,
    pub statistics: Vec<ClockSpacing>,
    pub max_deviation: f64,
}

/// Rescaled spacings for `n` in `[-depth, depth - 1]`.
pub fn clock_statistics(
    v: &PearsonPotential,
    length: f64,
    xi_star: f64,
    depth: usize,
) -> Result<ClockReport> {
    if depth == 0 {
        return Err(Error::InvalidArgument("depth must be at least 1".into()));
    }
    let d = depth as i64;
    let window = eigenvalues_near(v, length, xi_star, -d, d)?;
    let density = rho(xi_star);
    let statistics: Vec<ClockSpacing> = window
        .values
        .windows(2)
        .map(|w| {
            let spacing = w[1].1 - w[0].1;
            ClockSpacing {
                n: w[0].0,
                spacing,
                statistic: length * spacing * density,
            }
        })
        .collect();
    let max_deviation = statistics
        .iter()
        .map(|s| (s.statistic - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(ClockReport {
        window,
        statistics,
        max_deviation,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DosBin {
    pub lo: f64,
    pub hi: f64,
    /// Eigenvalues in `(lo, hi]`.
    pub count: usize,
    /// `count / L`
    pub mass: f64,
    /// `∫_lo^hi rho = (sqrt(hi) - sqrt(lo)) / pi`
    pub free_mass: f64,
}

impl DosBin {
    pub fn relative_error(&self) -> f64 {
        (self.mass - self.free_mass).abs() / self.free_mass
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DosEstimate {
    pub length: f64,
    pub bins: Vec<DosBin>,
}

impl DosEstimate {
    pub fn total_mass(&self) -> f64 {
        self.bins.iter().map(|b| b.mass).sum()
    }

    pub fn total_count(&self) -> usize {
        self.bins.iter().map(|b| b.count).sum()
    }

    pub fn max_relative_error(&self) -> f64 {
        self.bins
            .iter()
            .map(DosBin::relative_error)
            .fold(0.0, f64::max)
    }
}

/// Eigenvalue histogram on `interval` with mass `1/L` per eigenvalue.
pub fn density_of_states(
    v: &PearsonPotential,
    length: f64,
    interval: (f64, f64),
    bins: usize,
) -> Result<DosEstimate> {
    let (a, b) = interval;
    if !(a > 0.0 && b > a && b.is_finite()) || bins == 0 {
        return Err(Error::InvalidArgument(format!(
            "interval [{a}, {b}] with {bins} bins must lie in (0, inf)"
        )));
    }
    check_length(length)?;
    let edges: Vec<f64> = (0..=bins)
        .map(|i| a + (b - a) * i as f64 / bins as f64)
        .collect();
    let counts = edges
        .par_iter()
        .map(|&e| eigenvalue_count(v, e, length))
        .collect::<Result<Vec<_>>>()?;
    let bins = edges
        .windows(2)
        .zip(counts.windows(2))
        .map(|(e, c)| {
            let count = c[1].saturating_sub(c[0]);
            DosBin {
                lo: e[0],
                hi: e[1],
                count,
                mass: count as f64 / length,
                free_mass: (e[1].sqrt() - e[0].sqrt()) / PI,
            }
        })
        .collect();
    Ok(DosEstimate { length, bins })
}
