//! Numerical thresholds shared by the library, its tests and the acceptance suite.
//!
//! Everything that decides pass/fail lives here so that no check carries an
//! unexplained literal.

/// Default RK4 steps across one unit-width bump.
pub const DEFAULT_STEPS_PER_BUMP: usize = 512;

/// Smallest accepted step count for a bump solve.
pub const MIN_STEPS_PER_BUMP: usize = 16;

/// Allowed |det T - 1| per unit of propagated length.
pub const DET_DRIFT_PER_LENGTH: f64 = 1e-10;

/// Below this |sqrt(xi) * dx| the free transfer entries use their Taylor series.
pub const FREE_SERIES_THRESHOLD: f64 = 1e-4;

/// Below this |pi rho (b - a)| the sine kernel uses its Taylor series.
pub const SINC_SERIES_THRESHOLD: f64 = 1e-4;

/// Relative distance |xi - zeta| / max(1, |xi|) under which the off-diagonal
/// Christoffel-Darboux formula falls back to the diagonal route.
pub const NEAR_DIAGONAL_THRESHOLD: f64 = 1e-8;

/// Relative tolerance on eigenvalue positions after Newton refinement.
pub const EIGENVALUE_REL_TOL: f64 = 1e-10;

/// Residual bound |u'(xi, L)| <= ROOT_RESIDUAL * |(sqrt(xi) u, u')|.
pub const ROOT_RESIDUAL: f64 = 1e-10;

/// Fractional phase distance under which a reference energy counts as an eigenvalue.
pub const PHASE_TIE_TOL: f64 = 1e-9;

/// Scale-free linearity probes pass when max/min of the ratios is within this factor.
pub const LINEARITY_SPREAD: f64 = 0.20;

// Acceptance thresholds.

pub const FREE_SPECTRUM_REL: f64 = 1e-9;
pub const ORACLE_REL: f64 = 1e-4;
pub const ROUTE_AGREEMENT_REL: f64 = 1e-6;
pub const SINE_KERNEL_SUP: f64 = 0.05;
pub const CLOCK_MAX_DEVIATION: f64 = 0.02;
pub const DOS_BIN_REL: f64 = 0.02;
pub const DECREASE_SLACK: f64 = 0.10;
pub const VARIATIONAL_FD_ABS: f64 = 1e-6;
pub const MIN_OBSERVED_ORDER: f64 = 3.0;
