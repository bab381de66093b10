//! The Fourier-side fundamental solution `K̂(t,ξ)`: the solution of
//! `K̂_tt + a(ξ)K̂_t + |ξ|²K̂ = 0` with `K̂(0) = 0`, `K̂_t(0) = 1`.

mod localize;
mod ode;
mod taylor;

pub use localize::{chi, mid_band_constant, KernelBand, Localizer, SpectralKernel};
pub use ode::{ode_oracle, ode_trajectory};
pub use taylor::{g_integral, g_integral_quadrature, g_of_b, TaylorProfile};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::symbolkit::{norm, DissipationSymbol};

/// Relative half-width of the window around `a = 2|ξ|` treated as the double root.
pub const EPS_DEG: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    DampedOscillation,
    Overdamping,
    Degenerate,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeState {
    pub a: f64,
    pub omega: f64,
    pub regime: Regime,
    /// `a²/(4|ξ|²)`, absent at `ξ = 0`.
    pub b: Option<f64>,
}

impl ModeState {
    pub fn new(a: f64, omega: f64) -> Self {
        let regime = if a < 2.0 * omega * (1.0 - EPS_DEG) {
            Regime::DampedOscillation
        } else if a > 2.0 * omega * (1.0 + EPS_DEG) {
            Regime::Overdamping
        } else {
            Regime::Degenerate
        };
        let b = (omega > 0.0).then(|| a * a / (4.0 * omega * omega));
        Self { a, omega, regime, b }
    }
}

/// Roots of `λ² + aλ + ω² = 0`, `λ₊` first.
pub fn eigenvalues(a: f64, omega: f64) -> (Complex64, Complex64) {
    let disc = (a - 2.0 * omega) * (a + 2.0 * omega);
    if disc > 0.0 {
        let s = disc.sqrt();
        let minus = -0.5 * (a + s);
        let plus = -2.0 * omega * omega / (a + s);
        (Complex64::new(plus, 0.0), Complex64::new(minus, 0.0))
    } else {
        let w = 0.5 * (-disc).sqrt();
        (Complex64::new(-0.5 * a, w), Complex64::new(-0.5 * a, -w))
    }
}

pub(crate) fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// `(1 − e^{−z})/z`, the overdamped divided difference.
fn psi(z: f64) -> f64 {
    if z == 0.0 {
        1.0
    } else {
        -(-z).exp_m1() / z
    }
}

/// Damped frequency `|ξ|√(1−b)` without forming `b`.
fn damped_frequency(a: f64, omega: f64) -> f64 {
    0.5 * ((2.0 * omega - a) * (2.0 * omega + a)).sqrt()
}

/// Near the double root, `t·sinc` and its hyperbolic twin share the series in
/// `x = t²(ω² − a²/4)`.
fn degenerate_series(x: f64) -> (f64, f64) {
    let s = 1.0 - x / 6.0 + x * x / 120.0 - x * x * x / 5040.0;
    let ds = -1.0 / 6.0 + x / 60.0 - x * x / 1680.0;
    (s, ds)
}

pub fn khat_mode(a: f64, omega: f64, t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    match ModeState::new(a, omega).regime {
        Regime::DampedOscillation => {
            let w = damped_frequency(a, omega);
            (-0.5 * t * a).exp() * t * sinc(t * w)
        }
        Regime::Overdamping => {
            let (lp, lm) = eigenvalues(a, omega);
            let (lp, gap) = (lp.re, lp.re - lm.re);
            (lp * t).exp() * t * psi(gap * t)
        }
        Regime::Degenerate => {
            let x = t * t * (omega - 0.5 * a) * (omega + 0.5 * a);
            t * (-0.5 * t * a).exp() * degenerate_series(x).0
        }
    }
}

pub fn khat_dt_mode(a: f64, omega: f64, t: f64) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    match ModeState::new(a, omega).regime {
        Regime::DampedOscillation => {
            let w = damped_frequency(a, omega);
            (-0.5 * t * a).exp() * ((t * w).cos() - 0.5 * a * t * sinc(t * w))
        }
        Regime::Overdamping => {
            let (lp, lm) = eigenvalues(a, omega);
            let (lp, gap) = (lp.re, lp.re - lm.re);
            (lp * t).exp() * (lp * t * psi(gap * t) + (-gap * t).exp())
        }
        Regime::Degenerate => {
            let x = t * t * (omega - 0.5 * a) * (omega + 0.5 * a);
            let (s, ds) = degenerate_series(x);
            (-0.5 * t * a).exp() * ((1.0 - 0.5 * t * a) * s + 2.0 * x * ds)
        }
    }
}

pub fn khat(sym: &DissipationSymbol, t: f64, xi: &[f64]) -> f64 {
    khat_mode(sym.evaluate(xi), norm(xi), t)
}

pub fn khat_dt(sym: &DissipationSymbol, t: f64, xi: &[f64]) -> f64 {
    khat_dt_mode(sym.evaluate(xi), norm(xi), t)
}
