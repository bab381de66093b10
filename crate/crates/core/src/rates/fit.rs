//! Least-squares rate fits on sweep samples.

use serde::{Deserialize, Serialize};

use super::prediction::{LogLaw, RegimeEnd};
use crate::error::{Error, Result};

/// Minimum number of samples a fit accepts.
pub const MIN_POINTS: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    /// `t` or `τ`.
    pub x: f64,
    pub value: f64,
    pub quad_error: f64,
}

/// Which inequality a verdict certifies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Certified {
    /// Exact norms: the slope matches the prediction both ways.
    TwoSided,
    /// Upper bounds: decay is not slower than predicted.
    NotSlower,
    /// Lower bounds: decay is not faster than predicted.
    NotFaster,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitWindow {
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    /// Drop the decade farthest from this end of the sweep.
    pub drop_transient_decade: Option<RegimeEnd>,
    /// Points whose quadrature error exceeds this fraction of the value are skipped.
    pub max_rel_error: f64,
}

impl Default for FitWindow {
    fn default() -> Self {
        Self {
            lo: None,
            hi: None,
            drop_transient_decade: None,
            max_rel_error: 0.01,
        }
    }
}

impl FitWindow {
    /// The asymptotic default: the decade farthest from the regime end is
    /// dropped when the sweep spans at least two decades.
    pub fn asymptotic(end: RegimeEnd) -> Self {
        Self {
            drop_transient_decade: Some(end),
            ..Self::default()
        }
    }

    pub fn select(&self, samples: &[Sample]) -> Vec<Sample> {
        let xs: Vec<f64> = samples.iter().map(|s| s.x).collect();
        let (min, max) = xs.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
        let (mut lo, mut hi) = (self.lo.unwrap_or(min), self.hi.unwrap_or(max));
        if let Some(end) = self.drop_transient_decade {
            if max / min >= 100.0 * (1.0 - 1e-9) {
                match end {
                    RegimeEnd::TInf => lo = lo.max(10.0 * min),
                    RegimeEnd::TZero | RegimeEnd::TauZero => hi = hi.min(0.1 * max),
                }
            }
        }
        samples
            .iter()
            .filter(|s| s.x >= lo * (1.0 - 1e-12) && s.x <= hi * (1.0 + 1e-12))
            .filter(|s| s.quad_error <= self.max_rel_error * s.value.abs())
            .copied()
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub residual_rms: f64,
    pub window: [f64; 2],
    pub n_points: usize,
    /// Abscissa/ordinate transform: `loglog`, `semilog`, or a log law.
    pub law: String,
    pub predicted: Option<f64>,
    pub tol: Option<f64>,
    pub verdict: Option<bool>,
    pub certified: Option<Certified>,
    /// Extra conditions (linearity, sign) and their outcome.
    pub notes: Vec<String>,
}

fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    (slope, intercept, (rss / n).sqrt())
}

fn prepare(samples: &[Sample], window: &FitWindow) -> Result<Vec<Sample>> {
    let sel = window.select(samples);
    if sel.len() < MIN_POINTS {
        return Err(Error::Fit(format!(
            "{} usable points in the window, need {MIN_POINTS}",
            sel.len()
        )));
    }
    if let Some(s) = sel.iter().find(|s| !(s.value > 0.0) || !(s.x > 0.0)) {
        return Err(Error::Fit(format!("nonpositive sample {} at x = {}", s.value, s.x)));
    }
    Ok(sel)
}

fn result(sel: &[Sample], x: Vec<f64>, y: Vec<f64>, law: &str) -> FitResult {
    let (slope, intercept, residual_rms) = least_squares(&x, &y);
    FitResult {
        slope,
        intercept,
        residual_rms,
        window: [sel.first().unwrap().x, sel.last().unwrap().x],
        n_points: sel.len(),
        law: law.into(),
        predicted: None,
        tol: None,
        verdict: None,
        certified: None,
        notes: Vec::new(),
    }
}

/// Slope of `log value` against `log x`.
pub fn fit_power(samples: &[Sample], window: &FitWindow) -> Result<FitResult> {
    let sel = prepare(samples, window)?;
    let x = sel.iter().map(|s| s.x.ln()).collect();
    let y = sel.iter().map(|s| s.value.ln()).collect();
    Ok(result(&sel, x, y, "loglog"))
}

/// Slope of `log value` against `x`.
pub fn fit_semilog(samples: &[Sample], window: &FitWindow) -> Result<FitResult> {
    let sel = prepare(samples, window)?;
    let x = sel.iter().map(|s| s.x).collect();
    let y = sel.iter().map(|s| s.value.ln()).collect();
    Ok(result(&sel, x, y, "semilog"))
}

/// Fits a logarithmic law: `value²` (square-root laws) or `value` (`LogT`)
/// against `log x` or `log 1/x`. The verdict requires a positive slope and
/// `residual_rms ≤ 5%` of the ordinate range.
pub fn fit_loglaw(samples: &[Sample], law: LogLaw, window: &FitWindow) -> Result<FitResult> {
    let sel = prepare(samples, window)?;
    let (name, sq, sign) = match law {
        LogLaw::SqrtLogT => ("sqrt_log_t", true, 1.0),
        LogLaw::SqrtLogInvT => ("sqrt_log_inv_t", true, -1.0),
        LogLaw::LogT => ("log_t", false, 1.0),
        LogLaw::None | LogLaw::ExpDecay => {
            return Err(Error::Fit(format!("{law:?} is not a logarithmic law")));
        }
    };
    let x: Vec<f64> = sel.iter().map(|s| sign * s.x.ln()).collect();
    let y: Vec<f64> = sel.iter().map(|s| if sq { s.value * s.value } else { s.value }).collect();
    let range = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - y.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut fit = result(&sel, x, y, name);
    let linear = fit.residual_rms <= 0.05 * range;
    let positive = fit.slope > 0.0;
    fit.notes.push(format!("linearity {}", if linear { "ok" } else { "failed" }));
    fit.notes.push(format!("positive slope {}", if positive { "ok" } else { "failed" }));
    fit.verdict = Some(linear && positive);
    Ok(fit)
}

impl FitResult {
    /// Compares the slope with `predicted`. `TwoSided` needs `|slope − p| ≤ tol`;
    /// `NotSlower` needs `slope ≤ p + tol`; `NotFaster` needs `slope ≥ p − tol`.
    /// With `eps`, the two-sided window widens to `[p − tol, p + eps]`.
    pub fn judge(mut self, predicted: f64, tol: f64, direction: Certified, eps: Option<f64>) -> Self {
        let upper = predicted + eps.unwrap_or(tol);
        let lower = predicted - tol;
        let ok = match direction {
            Certified::TwoSided => self.slope >= lower && self.slope <= upper,
            Certified::NotSlower => self.slope <= upper,
            Certified::NotFaster => self.slope >= lower,
        };
        self.predicted = Some(predicted);
        self.tol = Some(tol);
        self.certified = Some(direction);
        self.verdict = Some(ok && self.verdict.unwrap_or(true));
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Some(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> Vec<Sample> {
        (0..n)
            .map(|i| {
                let x = lo * (hi / lo).powf(i as f64 / (n - 1) as f64);
                Sample { x, value: f(x), quad_error: 0.0 }
            })
            .collect()
    }

    #[test]
    fn exact_power() {
        let s = series(|t| 3.0 * t.powf(-1.5), 10.0, 1e3, 9);
        let f = fit_power(&s, &FitWindow::default()).unwrap();
        assert!((f.slope + 1.5).abs() < 1e-10 && f.residual_rms < 1e-10);
        let f = f.judge(-1.5, 0.1, Certified::TwoSided, None);
        assert!(f.passed());
    }

    #[test]
    fn perturbed_power_and_constant() {
        let s = series(|t| t.powf(-1.5) * (1.0 + 1.0 / t), 10.0, 1e3, 9);
        assert!((fit_power(&s, &FitWindow::default()).unwrap().slope + 1.5).abs() < 0.05);
        let c = series(|_| 2.0, 10.0, 1e3, 9);
        assert!(fit_power(&c, &FitWindow::default()).unwrap().slope.abs() < 1e-12);
    }

    #[test]
    fn log_laws() {
        let s = series(|t| t.ln().sqrt(), 10.0, 1e4, 10);
        let f = fit_loglaw(&s, LogLaw::SqrtLogT, &FitWindow::default()).unwrap();
        assert!(f.passed() && (f.slope - 1.0).abs() < 1e-12);
        let s = series(|tau| (-tau.ln()).sqrt(), 1e-4, 1e-1, 10);
        let f = fit_loglaw(&s, LogLaw::SqrtLogInvT, &FitWindow::default()).unwrap();
        assert!(f.passed() && (f.slope - 1.0).abs() < 1e-12);
        let s = series(|t| 1.0 / t, 10.0, 1e3, 9);
        assert!(!fit_loglaw(&s, LogLaw::SqrtLogT, &FitWindow::default()).unwrap().passed());
    }

    #[test]
    fn window_rules() {
        let mut s = series(|t| t, 1.0, 1e3, 13);
        s[12].quad_error = 100.0;
        let w = FitWindow::asymptotic(RegimeEnd::TInf);
        let sel = w.select(&s);
        assert!(sel.iter().all(|p| p.x >= 10.0 - 1e-9 && p.x < 1e3));
        assert!(fit_power(&s[..4], &FitWindow::default()).is_err());
        s[3].value = -1.0;
        assert!(fit_power(&s, &FitWindow::default()).is_err());
    }

    #[test]
    fn directions() {
        let s = series(|t| t.powf(-1.0), 10.0, 1e3, 9);
        let f = fit_power(&s, &FitWindow::default()).unwrap();
        assert!(f.clone().judge(-0.5, 0.1, Certified::NotSlower, None).passed());
        assert!(!f.clone().judge(-0.5, 0.1, Certified::NotFaster, None).passed());
        assert!(!f.clone().judge(-0.5, 0.1, Certified::TwoSided, None).passed());
        assert!(f.judge(-1.05, 0.01, Certified::TwoSided, Some(0.1)).passed());
    }
}
