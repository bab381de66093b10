//! Radial test functions for operator-norm lower bounds.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::lr::sphere_area;
use crate::error::{Error, Result};
use crate::spectra::quad::{gl_panel, gl_rule};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TestShape {
    /// `g = e^{−|x|²/2}`, `ĝ = (2π)^{n/2} e^{−|ξ|²/2}`.
    Gaussian,
    /// `g = (1 − x²)e^{−x²/2}` in one dimension, so `ĝ = √(2π) ξ² e^{−ξ²/2}` vanishes at 0.
    MomentCorrected,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestProfile {
    pub dim: usize,
    pub shape: TestShape,
}

fn panels<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, count: usize) -> f64 {
    let rule = gl_rule(16);
    let h = (b - a) / count as f64;
    (0..count).map(|i| gl_panel(f, a + i as f64 * h, a + (i + 1) as f64 * h, &rule)).sum()
}

impl TestProfile {
    /// Gaussian, or the moment-corrected profile when `n = 1`.
    pub fn default_for(dim: usize) -> Self {
        let shape = if dim == 1 { TestShape::MomentCorrected } else { TestShape::Gaussian };
        Self { dim, shape }
    }

    pub fn new(dim: usize, shape: TestShape) -> Result<Self> {
        if shape == TestShape::MomentCorrected && dim != 1 {
            return Err(Error::InvalidParams {
                name: "test profile".into(),
                reason: "the moment-corrected profile is one-dimensional".into(),
            });
        }
        Ok(Self { dim, shape })
    }

    pub fn g(&self, r: f64) -> f64 {
        let e = (-0.5 * r * r).exp();
        match self.shape {
            TestShape::Gaussian => e,
            TestShape::MomentCorrected => (1.0 - r * r) * e,
        }
    }

    pub fn ghat(&self, rho: f64) -> f64 {
        let e = (-0.5 * rho * rho).exp();
        match self.shape {
            TestShape::Gaussian => (2.0 * PI).powf(0.5 * self.dim as f64) * e,
            TestShape::MomentCorrected => (2.0 * PI).sqrt() * rho * rho * e,
        }
    }

    /// `ĝ_τ(ξ) = τ^{n/p′} ĝ(τξ)`, the transform of `g_τ(x) = τ^{−n/p} g(x/τ)`.
    pub fn ghat_scaled(&self, p: f64, tau: f64, rho: f64) -> f64 {
        let pc = 1.0 - 1.0 / p;
        tau.powf(self.dim as f64 * pc) * self.ghat(tau * rho)
    }

    /// `‖g‖_{L^p}`, which is also `‖g_τ‖_{L^p}` for every `τ`.
    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return 1.0;
        }
        match self.shape {
            TestShape::Gaussian => (2.0 * PI / p).powf(0.5 * self.dim as f64 / p),
            TestShape::MomentCorrected => {
                let f = |r: f64| self.g(r).abs().powf(p);
                (sphere_area(1) * (panels(&f, 0.0, 1.0, 32) + panels(&f, 1.0, 40.0, 256))).powf(1.0 / p)
            }
        }
    }

    /// `h(0) = (2π)^{−n}∫₀^∞ ĝ(s) s^{(n−3)/2} e^{−s^θ} ds`, integrated in `s = u²`.
    pub fn h0(&self, theta: f64) -> f64 {
        let n = self.dim as f64;
        let f = |u: f64| {
            if u == 0.0 {
                return 0.0;
            }
            let s = u * u;
            2.0 * self.ghat(s) * u.powf(n - 2.0) * (-s.powf(theta)).exp()
        };
        (2.0 * PI).powf(-n) * panels(&f, 0.0, 7.0, 256)
    }

    /// Confirms `h(0) ≠ 0` for the diffusion exponent `θ`.
    pub fn check_h0(&self, theta: f64) -> Result<f64> {
        let h = self.h0(theta);
        if !(h.abs() > 1e-10) {
            return Err(Error::NotApplicable(format!(
                "test profile has h(0) = {h:e} for θ = {theta}, n = {}",
                self.dim
            )));
        }
        Ok(h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_lp_closed_form() {
        let g = TestProfile::default_for(3);
        // ‖g‖₁ = (2π)^{3/2}, ‖g‖₂ = π^{3/4}.
        assert!((g.lp_norm(1.0) - (2.0 * PI).powf(1.5)).abs() < 1e-12);
        assert!((g.lp_norm(2.0) - PI.powf(0.75)).abs() < 1e-12);
        assert!((g.ghat(0.0) - g.lp_norm(1.0)).abs() < 1e-12);
    }

    #[test]
    fn one_dimensional_profile_has_zero_mean() {
        let g = TestProfile::default_for(1);
        assert_eq!(g.shape, TestShape::MomentCorrected);
        assert_eq!(g.ghat(0.0), 0.0);
        let mean = 2.0 * panels(&|r| g.g(r), 0.0, 40.0, 256);
        assert!(mean.abs() < 1e-12);
        // ‖g‖₂² = ∫(1−x²)²e^{−x²} = (3/4)√π.
        assert!((g.lp_norm(2.0).powi(2) - 0.75 * PI.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn h0_nonzero() {
        for n in 1..=3 {
            for &th in &[0.5, 1.0, 2.0] {
                assert!(TestProfile::default_for(n).check_h0(th).unwrap() > 0.0);
            }
        }
        assert!(TestProfile::new(2, TestShape::MomentCorrected).is_err());
    }

    #[test]
    fn scaled_transform_normalization() {
        // ĝ_τ(0) = τ^{n/p′}ĝ(0); for p = 1 it is τ-independent.
        let g = TestProfile::default_for(2);
        assert_eq!(g.ghat_scaled(1.0, 0.01, 0.0), g.ghat(0.0));
        assert!((g.ghat_scaled(2.0, 0.25, 0.0) - 0.25 * g.ghat(0.0)).abs() < 1e-14);
    }
}
