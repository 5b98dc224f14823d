//! Hybrid propagation of `-u'' + V u = xi u` along the half-line.
//!
//! Free gaps are crossed with the closed-form free transfer matrix; each bump
//! support is crossed with a fixed-step classical RK4 solve. The cost is
//! therefore proportional to the number of bumps passed, not to the length.

use crate::error::{Error, Result};
use crate::potential::{BumpProfile, PearsonPotential};
use crate::scalar::{cos_minus_sinc_over_sq, pair_norm, sinc, Complex64, Mat2, Scalar};
use crate::tolerances::{DEFAULT_STEPS_PER_BUMP, DET_DRIFT_PER_LENGTH, MIN_STEPS_PER_BUMP};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorSettings {
    pub steps_per_bump: usize,
    /// Allowed |det T - 1| per unit propagated length.
    pub det_tolerance: f64,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        Self {
            steps_per_bump: DEFAULT_STEPS_PER_BUMP,
            det_tolerance: DET_DRIFT_PER_LENGTH,
        }
    }
}

/// Energy `xi` with `Re xi > 0`, so that the principal square root is analytic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralParameter<S>(S);

impl<S: Scalar> SpectralParameter<S> {
    pub fn new(value: S) -> Result<Self> {
        if value.re() > 0.0 && value.re().is_finite() && value.im().is_finite() {
            Ok(Self(value))
        } else {
            Err(Error::NonPositiveSpectral {
                re: value.re(),
                im: value.im(),
            })
        }
    }

    pub fn value(self) -> S {
        self.0
    }

    /// Principal branch.
    pub fn sqrt(self) -> S {
        self.0.sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolutionState<S> {
    pub u: S,
    pub du: S,
    pub x: f64,
}

impl<S: Scalar> SolutionState<S> {
    /// `u(0) = 1, u'(0) = 0`.
    pub fn neumann() -> Self {
        Self {
            u: S::one(),
            du: S::zero(),
            x: 0.0,
        }
    }

    /// `u(0) = 0, u'(0) = 1`.
    pub fn dirichlet() -> Self {
        Self {
            u: S::zero(),
            du: S::one(),
            x: 0.0,
        }
    }

    pub fn pair(&self) -> [S; 2] {
        [self.u, self.du]
    }

    pub fn norm(&self) -> f64 {
        pair_norm(self.pair())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransferMatrix<S> {
    pub entries: Mat2<S>,
    pub from: f64,
    pub to: f64,
}

impl<S: Scalar> TransferMatrix<S> {
    pub fn det_drift(&self) -> f64 {
        (self.entries.det() - S::one()).abs()
    }

    /// Checks `|det - 1| <= tol_per_length * max(1, |to - from|)`.
    pub fn check_determinant(&self, tol_per_length: f64) -> Result<()> {
        let allowed = tol_per_length * (self.to - self.from).abs().max(1.0);
        if self.det_drift() <= allowed {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "determinant drift {:.3e} exceeds {allowed:.3e} over [{}, {}]",
                self.det_drift(),
                self.from,
                self.to
            )))
        }
    }

    pub fn apply(&self, state: SolutionState<S>) -> SolutionState<S> {
        let [u, du] = self.entries.apply(state.pair());
        SolutionState { u, du, x: self.to }
    }

    pub fn norm(&self) -> f64 {
        self.entries.norm()
    }
}

/// Coordinates of a solution in the free basis: `u = a1 Phi + a2 Psi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VariationCoeffs<S> {
    /// Coefficient of the Dirichlet solution `Phi = sin(sqrt(xi) x)/sqrt(xi)`.
    pub a1: S,
    /// Coefficient of the Neumann solution `Psi = cos(sqrt(xi) x)`.
    pub a2: S,
    pub a1_tilde: S,
    pub a2_tilde: S,
    pub x: f64,
}

/// Solution together with its xi-derivative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtendedState<S> {
    pub u: S,
    pub du: S,
    pub u_xi: S,
    pub du_xi: S,
    pub x: f64,
}

impl<S: Scalar> ExtendedState<S> {
    pub fn neumann() -> Self {
        Self {
            u: S::one(),
            du: S::zero(),
            u_xi: S::zero(),
            du_xi: S::zero(),
            x: 0.0,
        }
    }

    pub fn solution(&self) -> SolutionState<S> {
        SolutionState {
            u: self.u,
            du: self.du,
            x: self.x,
        }
    }
}

/// Free transfer over a displacement `dx`:
/// `[[cos(k dx), sin(k dx)/k], [-k sin(k dx), cos(k dx)]]`, `k = sqrt(xi)`.
pub(crate) fn free_matrix<S: Scalar>(xi: S, dx: f64) -> Mat2<S> {
    let z = xi.sqrt() * S::lift(dx);
    let c = z.cos();
    let s_over_k = sinc(z) * S::lift(dx);
    Mat2([[c, s_over_k], [-xi * s_over_k, c]])
}

/// Entrywise xi-derivative of [`free_matrix`].
pub(crate) fn free_matrix_dxi<S: Scalar>(xi: S, dx: f64) -> Mat2<S> {
    let z = xi.sqrt() * S::lift(dx);
    let c = z.cos();
    let s_over_k = sinc(z) * S::lift(dx);
    let half = S::lift(0.5);
    let dc = -half * S::lift(dx) * s_over_k;
    let ds = half * S::lift(dx * dx * dx) * cos_minus_sinc_over_sq(z);
    let dm = -half * (s_over_k + S::lift(dx) * c);
    Mat2([[dc, ds], [dm, dc]])
}

pub fn free_transfer<S: Scalar>(xi: S, x0: f64, x1: f64) -> Result<TransferMatrix<S>> {
    let xi = SpectralParameter::new(xi)?.value();
    Ok(TransferMatrix {
        entries: free_matrix(xi, x1 - x0),
        from: x0,
        to: x1,
    })
}

/// Fixed-step RK4 for a linear system `y' = F(V(s), y)` on `[s0, s1]`.
///
/// `potential` gives V at bump-local positions; it is sampled at step ends
/// and midpoints, the right end of each step being reused as the next left end.
pub(crate) fn rk4_linear<S: Scalar, const D: usize>(
    mut y: [S; D],
    s0: f64,
    s1: f64,
    steps: usize,
    potential: impl Fn(f64) -> f64,
    rhs: impl Fn(f64, &[S; D]) -> [S; D],
    mut on_step: impl FnMut(&[S; D]),
) -> [S; D] {
    let h = (s1 - s0) / steps as f64;
    let hs = S::lift(h);
    let half = S::lift(0.5 * h);
    let axpy =
        |y: &[S; D], a: S, k: &[S; D]| -> [S; D] { std::array::from_fn(|i| y[i] + a * k[i]) };
    let mut v_left = potential(s0);
    for i in 0..steps {
        let s = s0 + i as f64 * h;
        let v_mid = potential(s + 0.5 * h);
        let v_right = potential(if i + 1 == steps { s1 } else { s + h });
        let k1 = rhs(v_left, &y);
        let k2 = rhs(v_mid, &axpy(&y, half, &k1));
        let k3 = rhs(v_mid, &axpy(&y, half, &k2));
        let k4 = rhs(v_right, &axpy(&y, hs, &k3));
        let sixth = hs / S::lift(6.0);
        y = std::array::from_fn(|j| {
            y[j] + sixth * (k1[j] + S::lift(2.0) * k2[j] + S::lift(2.0) * k3[j] + k4[j])
        });
        v_left = v_right;
        on_step(&y);
    }
    y
}

/// Right-hand side of `(u, u')' = (u', (V - xi) u)`.
pub(crate) fn schrodinger_rhs<S: Scalar>(xi: S) -> impl Fn(f64, &[S; 2]) -> [S; 2] {
    move |v, y| [y[1], (S::lift(v) - xi) * y[0]]
}

/// Steps used for the bump-local interval `[s0, s1] ⊆ [0, 1]`.
pub(crate) fn steps_for(settings: &IntegratorSettings, s0: f64, s1: f64) -> usize {
    (((s1 - s0) * settings.steps_per_bump as f64).ceil() as usize).max(1)
}

/// Transfer matrix of the one-bump system `B' = [[0, 1], [lambda W - xi, 0]] B`
/// over `[0, 1]` with `B(0) = I`.
pub fn bump_transfer<S: Scalar>(
    profile: &BumpProfile,
    amplitude: f64,
    xi: S,
    steps: usize,
) -> Result<TransferMatrix<S>> {
    if steps < MIN_STEPS_PER_BUMP {
        return Err(Error::StepsTooSmall {
            steps,
            min: MIN_STEPS_PER_BUMP,
        });
    }
    let xi = SpectralParameter::new(xi)?.value();
    Ok(TransferMatrix {
        entries: bump_matrix(profile, amplitude, xi, 0.0, 1.0, steps),
        from: 0.0,
        to: 1.0,
    })
}

pub(crate) fn bump_matrix<S: Scalar>(
    profile: &BumpProfile,
    amplitude: f64,
    xi: S,
    s0: f64,
    s1: f64,
    steps: usize,
) -> Mat2<S> {
    let pot = |s: f64| amplitude * profile.evaluate(s);
    let rhs = schrodinger_rhs(xi);
    let c0 = rk4_linear([S::one(), S::zero()], s0, s1, steps, pot, &rhs, |_| {});
    let c1 = rk4_linear([S::zero(), S::one()], s0, s1, steps, pot, &rhs, |_| {});
    Mat2::from_columns(c0, c1)
}

/// Piece of a path along the half-line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Segment {
    Free {
        from: f64,
        to: f64,
    },
    /// Bump-local interval `[s0, s1]` of the bump at `center`.
    Bump {
        amplitude: f64,
        center: f64,
        s0: f64,
        s1: f64,
    },
}

/// Splits `[from, to]` into maximal free gaps and bump pieces. Zero-amplitude
/// bumps are absorbed into the surrounding free gap, so they propagate exactly.
pub(crate) fn segments(v: &PearsonPotential, from: f64, to: f64) -> Vec<Segment> {
    let mut out = Vec::new();
    let push_free = |out: &mut Vec<Segment>, a: f64, b: f64| {
        if b <= a {
            return;
        }
        if let Some(Segment::Free { to, .. }) = out.last_mut() {
            *to = b;
        } else {
            out.push(Segment::Free { from: a, to: b });
        }
    };
    let centers = v.centers();
    let mut k = centers.partition_point(|&c| c + 1.0 <= from);
    let mut x = from;
    while x < to {
        if k < centers.len() && centers[k] < to {
            let c = centers[k];
            let amplitude = v.amplitudes()[k];
            if c > x {
                push_free(&mut out, x, c);
                x = c;
            }
            let end = (c + 1.0).min(to);
            if amplitude == 0.0 {
                push_free(&mut out, x, end);
            } else {
                out.push(Segment::Bump {
                    amplitude,
                    center: c,
                    s0: x - c,
                    s1: end - c,
                });
            }
            x = end;
            k += 1;
        } else {
            push_free(&mut out, x, to);
            x = to;
        }
    }
    out
}

fn check_target(from: f64, to: f64) -> Result<()> {
    if to < from || to.is_nan() {
        Err(Error::TargetBehindState { from, to })
    } else {
        Ok(())
    }
}

/// Evolves `state` from `state.x` to `target`.
pub fn propagate_to<S: Scalar>(
    v: &PearsonPotential,
    xi: S,
    target: f64,
    state: SolutionState<S>,
) -> Result<SolutionState<S>> {
    let xi = SpectralParameter::new(xi)?.value();
    check_target(state.x, target)?;
    let settings = v.settings();
    let mut y = state.pair();
    for seg in segments(v, state.x, target) {
        y = match seg {
            Segment::Free { from, to } => free_matrix(xi, to - from).apply(y),
            Segment::Bump {
                amplitude, s0, s1, ..
            } => rk4_linear(
                y,
                s0,
                s1,
                steps_for(settings, s0, s1),
                |s| amplitude * v.profile().evaluate(s),
                schrodinger_rhs(xi),
                |_| {},
            ),
        };
    }
    Ok(SolutionState {
        u: y[0],
        du: y[1],
        x: target,
    })
}

/// Solution with `u(0) = 1, u'(0) = 0` evaluated at `x`.
pub fn neumann_solution<S: Scalar>(
    v: &PearsonPotential,
    xi: S,
    x: f64,
) -> Result<SolutionState<S>> {
    if x < 0.0 {
        return Err(Error::NegativePosition(x));
    }
    propagate_to(v, xi, x, SolutionState::neumann())
}

/// Solution with `u(0) = 0, u'(0) = 1` evaluated at `x`.
pub fn dirichlet_solution<S: Scalar>(
    v: &PearsonPotential,
    xi: S,
    x: f64,
) -> Result<SolutionState<S>> {
    if x < 0.0 {
        return Err(Error::NegativePosition(x));
    }
    propagate_to(v, xi, x, SolutionState::dirichlet())
}

/// Full transfer matrix of `V` from `from` to `to`.
pub fn transfer_matrix<S: Scalar>(
    v: &PearsonPotential,
    xi: S,
    from: f64,
    to: f64,
) -> Result<TransferMatrix<S>> {
    let start = |u, du| SolutionState { u, du, x: from };
    let c0 = propagate_to(v, xi, to, start(S::one(), S::zero()))?;
    let c1 = propagate_to(v, xi, to, start(S::zero(), S::one()))?;
    Ok(TransferMatrix {
        entries: Mat2::from_columns(c0.pair(), c1.pair()),
        from,
        to,
    })
}

/// Free-basis coordinates of an arbitrary state at `state.x`.
pub fn coefficients_of<S: Scalar>(xi: S, state: &SolutionState<S>) -> Result<VariationCoeffs<S>> {
    let xi = SpectralParameter::new(xi)?;
    // det T = 1, so T^{-1} = [[c, -s/k], [k s, c]].
    let t = free_matrix(xi.value(), state.x).0;
    let psi_coeff = t[1][1] * state.u - t[0][1] * state.du;
    let phi_coeff = -t[1][0] * state.u + t[0][0] * state.du;
    Ok(VariationCoeffs {
        a1: phi_coeff,
        a2: psi_coeff,
        a1_tilde: phi_coeff / xi.sqrt(),
        a2_tilde: psi_coeff,
        x: state.x,
    })
}

/// `(A1, A2)` of the Neumann solution at `x`.
pub fn variation_coeffs<S: Scalar>(
    v: &PearsonPotential,
    xi: S,
    x: f64,
) -> Result<VariationCoeffs<S>> {
    let state = neumann_solution(v, xi, x)?;
    coefficients_of(xi, &state)
}

impl<S: Scalar> VariationCoeffs<S> {
    /// `(u, u')` rebuilt from the coefficients.
    pub fn reconstruct(&self, xi: S) -> [S; 2] {
        free_matrix(xi, self.x).apply([self.a2, self.a1])
    }

    /// `(|a1_tilde|^2 + |a2_tilde|^2) / 2`.
    pub fn kappa(&self) -> f64 {
        0.5 * (self.a1_tilde.abs().powi(2) + self.a2_tilde.abs().powi(2))
    }
}

fn extended_rhs<S: Scalar>(xi: S) -> impl Fn(f64, &[S; 4]) -> [S; 4] {
    move |v, y| {
        let q = S::lift(v) - xi;
        [y[1], q * y[0], y[3], q * y[2] - y[0]]
    }
}

/// Evolves `(u, u', du/dxi, du'/dxi)` from `ext.x` to `target`.
pub fn propagate_extended<S: Scalar>(
    v: &PearsonPotential,
    xi: S,
    target: f64,
    ext: ExtendedState<S>,
) -> Result<ExtendedState<S>> {
    let xi = SpectralParameter::new(xi)?.value();
    check_target(ext.x, target)?;
    let settings = v.settings();
    let mut y = [ext.u, ext.du, ext.u_xi, ext.du_xi];
    for seg in segments(v, ext.x, target) {
        y = match seg {
            Segment::Free { from, to } => {
                let t = free_matrix(xi, to - from);
                let dt = free_matrix_dxi(xi, to - from);
                let [u, du] = t.apply([y[0], y[1]]);
                let [a, b] = t.apply([y[2], y[3]]);
                let [c, d] = dt.apply([y[0], y[1]]);
                [u, du, a + c, b + d]
            }
            Segment::Bump {
                amplitude, s0, s1, ..
            } => rk4_linear(
                y,
                s0,
                s1,
                steps_for(settings, s0, s1),
                |s| amplitude * v.profile().evaluate(s),
                extended_rhs(xi),
                |_| {},
            ),
        };
    }
    Ok(ExtendedState {
        u: y[0],
        du: y[1],
        u_xi: y[2],
        du_xi: y[3],
        x: target,
    })
}

pub fn neumann_extended<S: Scalar>(
    v: &PearsonPotential,
    xi: S,
    x: f64,
) -> Result<ExtendedState<S>> {
    if x < 0.0 {
        return Err(Error::NegativePosition(x));
    }
    propagate_extended(v, xi, x, ExtendedState::neumann())
}

/// Complex shift `xi + i t / x` used by strip estimates.
pub fn strip_point(xi: f64, t: f64, x: f64) -> Complex64 {
    Complex64::new(xi, t / x)
}
