//! Sparse (Pearson) potentials `V(x) = sum_n lambda_n W(x - N_n)` on the half-line.
//!
//! Bumps have unit-width support `[N_n, N_n + 1]` and are kept disjoint, so
//! evaluation is a binary search over the centers. A potential also carries the
//! integrator settings used whenever it is propagated through.

mod hat_n;
mod spec;

pub use hat_n::{empirical_hat_n, HatNSearch};
pub(crate) use spec::line_of;
pub use spec::{AmplitudeRule, CenterRule, PotentialSpec};

use std::fmt;

use crate::error::{Error, Result};
use crate::propagate::IntegratorSettings;

/// Default growth factor between consecutive bump centers.
pub const DEFAULT_SPARSITY_RATIO: f64 = 10.0;

/// A non-negative smooth profile supported on `[0, 1]`.
#[derive(Clone)]
pub enum BumpProfile {
    /// `exp(4 - 1/(x(1-x)))` on `(0, 1)`, peak value 1 at `x = 1/2`.
    Canonical,
    /// User profile; values outside `(0, 1)` are ignored and negatives clamped.
    Custom { name: String, f: fn(f64) -> f64 },
}

impl BumpProfile {
    pub fn evaluate(&self, x: f64) -> f64 {
        if x <= 0.0 || x >= 1.0 {
            return 0.0;
        }
        match self {
            BumpProfile::Canonical => (4.0 - 1.0 / (x * (1.0 - x))).exp(),
            BumpProfile::Custom { f, .. } => f(x).max(0.0),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        match self {
            BumpProfile::Canonical => 1.0,
            BumpProfile::Custom { .. } => (1..4096)
                .map(|i| self.evaluate(i as f64 / 4096.0))
                .fold(0.0, f64::max),
        }
    }

    /// Closed support interval.
    pub fn support(&self) -> (f64, f64) {
        (0.0, 1.0)
    }

    pub fn name(&self) -> &str {
        match self {
            BumpProfile::Canonical => "canonical",
            BumpProfile::Custom { name, .. } => name,
        }
    }
}

impl fmt::Debug for BumpProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BumpProfile({})", self.name())
    }
}

pub fn canonical_bump() -> BumpProfile {
    BumpProfile::Canonical
}

/// Number of leading bumps kept by [`PearsonPotential::truncate`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TruncationLevel(pub usize);

#[derive(Clone, Debug)]
pub struct PearsonPotential {
    profile: BumpProfile,
    amplitudes: Vec<f64>,
    centers: Vec<f64>,
    decay_from: usize,
    settings: IntegratorSettings,
}

impl PearsonPotential {
    /// Builds a potential whose amplitudes are non-increasing in modulus throughout.
    pub fn new(profile: BumpProfile, amplitudes: Vec<f64>, centers: Vec<f64>) -> Result<Self> {
        Self::with_decay_from(profile, amplitudes, centers, 0)
    }

    /// Like [`new`](Self::new) but only requires `|lambda_n|` to be
    /// non-increasing for indices `n >= decay_from` (0-based).
    pub fn with_decay_from(
        profile: BumpProfile,
        amplitudes: Vec<f64>,
        centers: Vec<f64>,
        decay_from: usize,
    ) -> Result<Self> {
        if amplitudes.len() != centers.len() {
            return Err(Error::InvalidPotential(format!(
                "{} amplitudes for {} centers",
                amplitudes.len(),
                centers.len()
            )));
        }
        if let Some(bad) = amplitudes.iter().find(|a| !a.is_finite()) {
            return Err(Error::InvalidPotential(format!(
                "amplitude {bad} is not finite"
            )));
        }
        if let Some(&first) = centers.first() {
            if !(first >= 0.0) || !first.is_finite() {
                return Err(Error::InvalidPotential(format!(
                    "center {first} must be >= 0"
                )));
            }
        }
        for (i, w) in centers.windows(2).enumerate() {
            if !(w[1] - w[0] >= 1.0) || !w[1].is_finite() {
                return Err(Error::InvalidPotential(format!(
                    "centers {} and {} (indices {i}, {}) overlap; gaps must be >= 1",
                    w[0],
                    w[1],
                    i + 1
                )));
            }
        }
        for (i, w) in amplitudes.windows(2).enumerate().skip(decay_from) {
            if w[1].abs() > w[0].abs() {
                return Err(Error::InvalidPotential(format!(
                    "|lambda| increases from {} to {} at index {}",
                    w[0],
                    w[1],
                    i + 1
                )));
            }
        }
        Ok(Self {
            profile,
            amplitudes,
            centers,
            decay_from,
            settings: IntegratorSettings::default(),
        })
    }

    /// The free operator: no bumps at all.
    pub fn zero() -> Self {
        Self {
            profile: BumpProfile::Canonical,
            amplitudes: Vec::new(),
            centers: Vec::new(),
            decay_from: 0,
            settings: IntegratorSettings::default(),
        }
    }

    pub fn single_bump(amplitude: f64, center: f64) -> Result<Self> {
        Self::new(BumpProfile::Canonical, vec![amplitude], vec![center])
    }

    pub fn with_settings(mut self, settings: IntegratorSettings) -> Self {
        self.settings = settings;
        self
    }

    pub fn settings(&self) -> &IntegratorSettings {
        &self.settings
    }

    pub fn profile(&self) -> &BumpProfile {
        &self.profile
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Index of the bump whose support `[N_k, N_k + 1]` contains `x`.
    pub fn bump_containing(&self, x: f64) -> Option<usize> {
        let k = self.centers.partition_point(|&c| c <= x).checked_sub(1)?;
        (x <= self.centers[k] + 1.0).then_some(k)
    }

    pub fn evaluate(&self, x: f64) -> Result<f64> {
        if x < 0.0 {
            return Err(Error::NegativePosition(x));
        }
        Ok(self.bump_containing(x).map_or(0.0, |k| {
            self.amplitudes[k] * self.profile.evaluate(x - self.centers[k])
        }))
    }

    /// Keeps the first `level` bumps.
    pub fn truncate(&self, level: TruncationLevel) -> Result<Self> {
        let TruncationLevel(ell) = level;
        if ell > self.len() {
            return Err(Error::TruncationOutOfRange {
                requested: ell,
                available: self.len(),
            });
        }
        Ok(Self {
            profile: self.profile.clone(),
            amplitudes: self.amplitudes[..ell].to_vec(),
            centers: self.centers[..ell].to_vec(),
            decay_from: self.decay_from,
            settings: self.settings,
        })
    }

    /// Copy with bump `index` (0-based) given a new amplitude; the decay
    /// constraint is re-checked only past the modified bump.
    pub fn with_amplitude(&self, index: usize, amplitude: f64) -> Result<Self> {
        if index >= self.len() {
            return Err(Error::TruncationOutOfRange {
                requested: index + 1,
                available: self.len(),
            });
        }
        let mut amplitudes = self.amplitudes.clone();
        amplitudes[index] = amplitude;
        let decay_from = self.decay_from.max(index + 1);
        Ok(Self::with_decay_from(
            self.profile.clone(),
            amplitudes,
            self.centers.clone(),
            decay_from,
        )?
        .with_settings(self.settings))
    }
}

pub fn evaluate_potential(v: &PearsonPotential, x: f64) -> Result<f64> {
    v.evaluate(x)
}

pub fn truncate(v: &PearsonPotential, level: TruncationLevel) -> Result<PearsonPotential> {
    v.truncate(level)
}

/// `lambda_n = scale * n^(-exponent)` for `n = 1..=count`.
pub fn power_law_amplitudes(scale: f64, exponent: f64, count: usize) -> Vec<f64> {
    (1..=count)
        .map(|n| scale * (n as f64).powf(-exponent))
        .collect()
}

/// Centers `N_1 = first`, `N_{n+1} = ceil(ratio * N_n)`.
pub fn geometric_centers(first: f64, ratio: f64, count: usize) -> Result<Vec<f64>> {
    if !(ratio > 1.0) || !ratio.is_finite() {
        return Err(Error::InvalidSchedule(format!(
            "ratio {ratio} must exceed 1"
        )));
    }
    if !(first >= 1.0) || !first.is_finite() {
        return Err(Error::InvalidSchedule(format!(
            "first center {first} must be >= 1"
        )));
    }
    let mut centers = Vec::with_capacity(count);
    let mut next = first;
    for _ in 0..count {
        centers.push(next);
        next = (ratio * next).ceil();
    }
    Ok(centers)
}

/// Canonical-profile potential with the first `count` amplitudes placed on a
/// geometric center schedule.
pub fn geometric_schedule(
    amplitudes: &[f64],
    first: f64,
    ratio: f64,
    count: usize,
) -> Result<PearsonPotential> {
    if amplitudes.len() < count {
        return Err(Error::InvalidSchedule(format!(
            "{count} bumps requested but only {} amplitudes given",
            amplitudes.len()
        )));
    }
    let centers = geometric_centers(first, ratio, count)?;
    PearsonPotential::new(
        BumpProfile::Canonical,
        amplitudes[..count].to_vec(),
        centers,
    )
}

/// The headline potential: `lambda_n = n^(-1/4)`, centers `10, 100, 1000, ...`.
pub fn canonical_pearson(count: usize) -> PearsonPotential {
    geometric_schedule(
        &power_law_amplitudes(1.0, 0.25, count),
        10.0,
        DEFAULT_SPARSITY_RATIO,
        count,
    )
    .expect("canonical schedule is valid")
}
