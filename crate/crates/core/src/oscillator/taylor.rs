//! Expansion of the low-frequency kernel in powers of `t·|ξ|·b·g`, where
//! `f = √(1−b) = 1 + b·g`, around the free oscillation `sin(t|ξ|)`.

use std::sync::Arc;

use super::localize::{wave_zone, Localizer};
use super::khat_mode;
use crate::error::{Error, Result};
use crate::spectra::quad::{gauss_legendre, gl_panel};
use crate::spectra::{RadialMultiplier, SmoothPart, Wave};
use crate::symbolkit::{DissipationSymbol, RadialFn};

#[derive(Clone)]
pub struct TaylorProfile {
    pub order: usize,
    pub loc: Localizer,
    a: RadialFn,
}

impl std::fmt::Debug for TaylorProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TaylorProfile").field("order", &self.order).field("loc", &self.loc).finish()
    }
}

/// `g = (f − 1)/b = −1/(1 + √(1−b))`, finite at `b = 0` where it equals `−1/2`.
pub fn g_of_b(b: f64) -> f64 {
    -1.0 / (1.0 + (1.0 - b).sqrt())
}

/// `−(1/8)∫₀¹ (1 − bτ)^{−1/2} dτ` by 64-point Gauss–Legendre.
pub fn g_integral_quadrature(b: f64) -> f64 {
    let rule = gauss_legendre(64);
    -0.125 * gl_panel(&|tau: f64| (1.0 - b * tau).powf(-0.5), 0.0, 1.0, &rule)
}

/// Closed form of the same integral; it equals `g/4`.
pub fn g_integral(b: f64) -> f64 {
    0.25 * g_of_b(b)
}

fn factorial(l: usize) -> f64 {
    (1..=l).map(|k| k as f64).product()
}

impl TaylorProfile {
    /// Requires a radial symbol with `θ₀ > 1` and `b ≤ 1/4` on the support of `φ₀`.
    pub fn new(sym: &DissipationSymbol, order: usize) -> Result<Self> {
        if !(sym.theta0 > 1.0) {
            return Err(Error::Unsupported(format!(
                "expansion needs θ₀ > 1, `{}` has θ₀ = {}",
                sym.label, sym.theta0
            )));
        }
        let a = sym
            .radial_fn()
            .ok_or_else(|| Error::Unsupported("expansion of a non-radial symbol".into()))?;
        let loc = Localizer::for_symbol(sym)?;
        for i in 1..=400 {
            let r = 4.0 * loc.delta * i as f64 / 400.0;
            let av = a(r);
            if av * av / (4.0 * r * r) > 0.25 {
                return Err(Error::Normalization(format!("b > 1/4 at |ξ| = {r} inside the low band")));
            }
        }
        Ok(Self { order, loc, a })
    }

    pub fn b(&self, rho: f64) -> f64 {
        if rho == 0.0 {
            return 0.0;
        }
        let av = (self.a)(rho);
        av * av / (4.0 * rho * rho)
    }

    pub fn f(&self, rho: f64) -> f64 {
        (1.0 - self.b(rho)).sqrt()
    }

    pub fn g(&self, rho: f64) -> f64 {
        g_of_b(self.b(rho))
    }

    /// `φ₀ (sin^{(ℓ)}(t|ξ|)/|ξ|) (t|ξ|bg)^ℓ/ℓ! · e^{−ta/2}/f`.
    pub fn term(&self, l: usize, t: f64, rho: f64) -> f64 {
        let w = self.loc.phi0(rho);
        if w == 0.0 {
            return 0.0;
        }
        let (b, av) = (self.b(rho), (self.a)(rho));
        let f = (1.0 - b).sqrt();
        let damp = (-0.5 * t * av).exp() / f;
        let x = t * rho;
        if l == 0 {
            let s = if x.abs() < 1e-4 { 1.0 - x * x / 6.0 } else { x.sin() / x };
            return w * t * s * damp;
        }
        let deriv = (x + l as f64 * std::f64::consts::FRAC_PI_2).sin();
        w * deriv / rho * (x * b * g_of_b(b)).powi(l as i32) / factorial(l) * damp
    }

    pub fn low_kernel(&self, t: f64, rho: f64) -> f64 {
        self.loc.phi0(rho) * khat_mode((self.a)(rho), rho, t)
    }

    /// `K̂₀ − Σ_{ℓ≤N} m_ℓ`.
    pub fn residual(&self, t: f64, rho: f64) -> f64 {
        let s: f64 = (0..=self.order).map(|l| self.term(l, t, rho)).sum();
        self.low_kernel(t, rho) - s
    }

    /// The main term `m₀` in wave/smooth form.
    pub fn main_term_multiplier(&self, t: f64) -> RadialMultiplier {
        self.split_multiplier(t, false)
    }

    /// `K̂₀ − m₀` in wave/smooth form (order-0 residual).
    pub fn residual_multiplier(&self, t: f64) -> RadialMultiplier {
        self.split_multiplier(t, true)
    }

    fn split_multiplier(&self, t: f64, residual: bool) -> RadialMultiplier {
        let start = 4.0 / t;
        let hi = 4.0 * self.loc.delta;
        let me = self.clone();
        let mut m = RadialMultiplier {
            breakpoints: self.loc.breakpoints(),
            ..Default::default()
        };
        let core_hi = start.min(hi);
        let zero_order = TaylorProfile { order: 0, ..me.clone() };
        m.smooth.push(SmoothPart {
            f: Arc::new(move |r| {
                if residual {
                    zero_order.residual(t, r)
                } else {
                    zero_order.term(0, t, r)
                }
            }),
            lo: 0.0,
            hi: core_hi,
            osc: t,
        });
        if start < hi {
            debug_assert!(wave_zone((self.a)(hi), hi));
            let amp = {
                let me = me.clone();
                move |r: f64| me.loc.phi0(r) * (-0.5 * t * (me.a)(r)).exp() / (r * me.f(r))
            };
            if residual {
                let me2 = me.clone();
                m.waves.push(Wave {
                    amp: Arc::new(amp.clone()),
                    phase: Arc::new(move |r| t * r * me2.f(r)),
                    rate: t,
                    lo: start,
                    hi,
                });
                m.waves.push(Wave {
                    amp: Arc::new(move |r| -amp(r)),
                    phase: Arc::new(move |r| t * r),
                    rate: t,
                    lo: start,
                    hi,
                });
            } else {
                m.waves.push(Wave {
                    amp: Arc::new(amp),
                    phase: Arc::new(move |r| t * r),
                    rate: t,
                    lo: start,
                    hi,
                });
            }
        }
        m
    }
}
