//! Predicted exponents of kernel norms in each theorem regime.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norms::{d_exponent, serde_exp, PQPair};
use crate::oscillator::KernelBand;
use crate::symbolkit::DissipationSymbol;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Case {
    /// Low frequencies, damped oscillations, `θ₀ > 1`.
    ThmD,
    /// High frequencies, damped oscillations, `θ₁ ∈ [0, 1)`.
    ThmR,
    /// Low frequencies, overdamping, `θ₀ ∈ [0, 1)`.
    EffLow,
    /// High frequencies, overdamping, `θ₁ ∈ (1, 2]`.
    EffHigh,
    /// `θ₀ = 1` or `θ₁ = 1`.
    Theta1,
    /// `‖sinc(|ξ|)e^{−(τ|ξ|)^θ}‖` as `τ → 0`.
    Crucial,
    /// The same in `n = 2` for `(1,2)` and `(2,∞)`.
    CrucialLog,
    /// Mid band, exponential decay.
    K12,
    /// `‖F⁻¹(|ξ|^η e^{−t|ξ|^θ})‖_{L^r}`.
    LemmaExp,
}

impl Case {
    pub fn as_str(&self) -> &'static str {
        match self {
            Case::ThmD => "thm_d",
            Case::ThmR => "thm_r",
            Case::EffLow => "eff_low",
            Case::EffHigh => "eff_high",
            Case::Theta1 => "theta1",
            Case::Crucial => "crucial",
            Case::CrucialLog => "crucial_log",
            Case::K12 => "k12",
            Case::LemmaExp => "lemma_exp",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogLaw {
    None,
    /// `value ~ (log t)^{1/2}`.
    SqrtLogT,
    /// `value ~ log t`.
    LogT,
    /// `value ~ (log 1/t)^{1/2}`, also used for `τ → 0`.
    SqrtLogInvT,
    /// `value ~ e^{−ct}`.
    ExpDecay,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeEnd {
    TInf,
    TZero,
    TauZero,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub case: Case,
    pub exponent: Option<f64>,
    pub log_law: LogLaw,
    pub regime_end: RegimeEnd,
    /// Human-readable constraint under which the formula is asserted.
    pub applicability: String,
    /// The estimate holds only up to an arbitrarily small `t^{−ε}` loss.
    pub eps_loss: bool,
    pub n: usize,
    #[serde(with = "serde_exp")]
    pub p: f64,
    #[serde(with = "serde_exp")]
    pub q: f64,
    pub theta: f64,
}

fn refuse(case: Case, why: String) -> Error {
    Error::NotApplicable(format!("{}: {why}", case.as_str()))
}

fn exceptional_2d(n: usize, p: f64, q: f64) -> bool {
    n == 2 && ((p == 1.0 && q == 2.0) || (p == 2.0 && q.is_infinite()))
}

fn pos(x: f64) -> f64 {
    x.max(0.0)
}

/// Predicted rate for `case` with exponents `(p, q)` in dimension `n` and
/// symbol order `θ` (the relevant `θ₀` or `θ₁`, or the diffusion exponent).
pub fn predicted_exponent(case: Case, n: usize, p: f64, q: f64, theta: f64) -> Result<Prediction> {
    let pair = PQPair::new(p, q)?;
    if n == 0 {
        return Err(refuse(case, "dimension must be ≥ 1".into()));
    }
    let s = n as f64 * pair.gap();
    let d = d_exponent(p, q, n);
    let mut pred = Prediction {
        case,
        exponent: None,
        log_law: LogLaw::None,
        regime_end: RegimeEnd::TInf,
        applicability: String::new(),
        eps_loss: false,
        n,
        p,
        q,
        theta,
    };
    match case {
        Case::ThmD => {
            if !(theta > 1.0) {
                return Err(refuse(case, format!("needs θ₀ > 1, got {theta}")));
            }
            pred.applicability = "θ₀ > 1, t → ∞".into();
            if exceptional_2d(n, p, q) {
                pred.log_law = LogLaw::SqrtLogT;
            } else {
                pred.exponent = Some(1.0 - s + pos(d - 1.0) * (1.0 - 1.0 / theta));
            }
        }
        Case::ThmR => {
            pred.regime_end = RegimeEnd::TZero;
            if theta > 0.0 && theta < 1.0 {
                pred.applicability = "θ₁ ∈ (0,1), t → 0".into();
                if exceptional_2d(n, p, q) {
                    pred.log_law = LogLaw::SqrtLogInvT;
                } else {
                    pred.exponent = Some(1.0 - s - pos(d - 1.0) * (1.0 / theta - 1.0));
                }
            } else if theta == 0.0 {
                let interior = p > 1.0 && q.is_finite();
                if interior && d <= 1.0 {
                    pred.applicability = "θ₁ = 0, 1 < p ≤ q < ∞, d(p,q) ≤ 1".into();
                } else if !interior && d < 1.0 {
                    pred.applicability = "θ₁ = 0, endpoint pair, d(p,q) < 1, ε-loss".into();
                    pred.eps_loss = true;
                } else {
                    return Err(refuse(case, format!("θ₁ = 0 asserts nothing for d(p,q) = {d}")));
                }
                pred.exponent = Some(1.0 - s);
            } else {
                return Err(refuse(case, format!("needs θ₁ ∈ [0,1), got {theta}")));
            }
        }
        Case::EffLow => {
            if !(theta >= 0.0 && theta < 1.0) {
                return Err(refuse(case, format!("needs θ₀ ∈ [0,1), got {theta}")));
            }
            let endpoint = (p == 1.0 && q == 1.0) || (p.is_infinite() && q.is_infinite());
            if theta == 0.0 && endpoint {
                return Err(refuse(case, "θ₀ = 0 asserts nothing for p = q = 1 or p = q = ∞".into()));
            }
            pred.applicability = "θ₀ ∈ [0,1), t → ∞".into();
            let log_case = (p == 1.0 && n as f64 * (1.0 - 1.0 / q) == theta)
                || (q.is_infinite() && n as f64 / p == theta);
            if log_case && theta > 0.0 {
                pred.log_law = LogLaw::LogT;
            } else if s >= theta {
                pred.exponent = Some(-(s - theta) / (2.0 - theta));
            } else {
                pred.exponent = Some(1.0 - s / theta);
            }
        }
        Case::EffHigh => {
            if !(theta > 1.0 && theta <= 2.0) {
                return Err(refuse(case, format!("needs θ₁ ∈ (1,2], got {theta}")));
            }
            pred.regime_end = RegimeEnd::TZero;
            pred.applicability = "θ₁ ∈ (1,2], t → 0".into();
            let eps_case = (p == 1.0 && n as f64 * (1.0 - 1.0 / q) == theta)
                || (q.is_infinite() && n as f64 / p == theta);
            if theta == 2.0 {
                let ok = if p > 1.0 && q.is_finite() {
                    s <= 2.0
                } else if p == 1.0 {
                    n as f64 * (1.0 - 1.0 / q) < 2.0
                } else {
                    n as f64 / p < 2.0
                };
                if !ok {
                    return Err(refuse(case, "θ₁ = 2 outside its admissible pairs".into()));
                }
                pred.exponent = Some(0.0);
            } else if eps_case {
                pred.exponent = Some(0.0);
                pred.eps_loss = true;
            } else {
                pred.exponent = Some(-pos(s - theta) / (2.0 - theta));
            }
        }
        Case::Theta1 => {
            if theta != 1.0 {
                return Err(refuse(case, format!("needs θ = 1, got {theta}")));
            }
            pred.applicability = "θ = 1".into();
            pred.exponent = Some(1.0 - s);
        }
        Case::Crucial => {
            if !(theta > 0.0) {
                return Err(refuse(case, "needs θ > 0".into()));
            }
            if exceptional_2d(n, p, q) {
                return Err(refuse(case, "n = 2 with (1,2) or (2,∞) follows the log law".into()));
            }
            pred.regime_end = RegimeEnd::TauZero;
            pred.applicability = "θ > 0, τ → 0".into();
            pred.exponent = Some(-pos(d - 1.0));
        }
        Case::CrucialLog => {
            if !(theta > 0.0) || !exceptional_2d(n, p, q) {
                return Err(refuse(case, "only n = 2 with (1,2) or (2,∞)".into()));
            }
            pred.regime_end = RegimeEnd::TauZero;
            pred.applicability = "n = 2, (1,2) or (2,∞), τ → 0".into();
            pred.log_law = LogLaw::SqrtLogInvT;
        }
        Case::K12 => {
            pred.applicability = "mid band, any (p,q)".into();
            pred.log_law = LogLaw::ExpDecay;
        }
        Case::LemmaExp => {
            return lemma_exp_prediction(n, q, theta, 0.0);
        }
    }
    Ok(pred)
}

/// `−(n/θ)(1 − 1/r) − η/θ` for the diffusion kernel `|ξ|^η e^{−t|ξ|^θ}` in `L^r`.
pub fn lemma_exp_prediction(n: usize, r: f64, theta: f64, eta: f64) -> Result<Prediction> {
    if !(theta > 0.0) || !(r >= 1.0) {
        return Err(refuse(Case::LemmaExp, format!("needs θ > 0 and r ≥ 1, got θ = {theta}, r = {r}")));
    }
    if !(eta >= 0.0) {
        return Err(refuse(Case::LemmaExp, format!("needs η ≥ 0, got {eta}")));
    }
    let nf = n as f64;
    Ok(Prediction {
        case: Case::LemmaExp,
        exponent: Some(-(nf / theta) * (1.0 - 1.0 / r) - eta / theta),
        log_law: LogLaw::None,
        regime_end: RegimeEnd::TInf,
        applicability: "pure diffusion kernel, exact scaling".into(),
        eps_loss: false,
        n,
        p: 1.0,
        q: r,
        theta,
    })
}

/// Answer of [`claim_for`]: a prediction, or the reason none is asserted.
#[derive(Clone, Debug, PartialEq)]
pub enum Claim {
    Predicted(Prediction),
    NoClaim(String),
}

/// The single theorem case that speaks for `(sym, band, pair)`.
pub fn claim_for(sym: &DissipationSymbol, band: KernelBand, pair: PQPair) -> Claim {
    let n = sym.dim;
    let (p, q) = (pair.p, pair.q);
    if sym.flags.screening_only {
        return Claim::NoClaim(format!("`{}` lies outside the hypotheses", sym.label));
    }
    let result = match band {
        KernelBand::Full => return Claim::NoClaim("the full kernel mixes several regimes".into()),
        KernelBand::Mid => predicted_exponent(Case::K12, n, p, q, 0.0),
        KernelBand::Low => {
            let th = sym.theta0;
            if th > 1.0 {
                predicted_exponent(Case::ThmD, n, p, q, th)
            } else if th == 1.0 {
                predicted_exponent(Case::Theta1, n, p, q, th)
            } else {
                predicted_exponent(Case::EffLow, n, p, q, th)
            }
        }
        KernelBand::High => {
            if sym.flags.regularity_loss || sym.flags.log_high {
                return Claim::NoClaim(format!("`{}` has no power-law high-frequency order", sym.label));
            }
            let th = sym.theta1;
            if th < 1.0 {
                predicted_exponent(Case::ThmR, n, p, q, th)
            } else if th == 1.0 {
                predicted_exponent(Case::Theta1, n, p, q, th).map(|mut pr| {
                    pr.regime_end = RegimeEnd::TZero;
                    pr
                })
            } else {
                predicted_exponent(Case::EffHigh, n, p, q, th)
            }
        }
    };
    match result {
        Ok(pr) => Claim::Predicted(pr),
        Err(e) => Claim::NoClaim(e.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolkit::{model_zoo, zoo_catalog};
    use std::collections::BTreeMap;

    const INF: f64 = f64::INFINITY;

    fn exp(case: Case, n: usize, p: f64, q: f64, th: f64) -> f64 {
        predicted_exponent(case, n, p, q, th).unwrap().exponent.unwrap()
    }

    #[test]
    fn examples() {
        assert_eq!(exp(Case::ThmD, 3, 1.0, INF, 2.0), -1.5);
        assert_eq!(exp(Case::ThmD, 3, 1.0, 1.0, 2.0), 1.0);
        assert_eq!(exp(Case::EffLow, 3, 1.0, INF, 0.0), -1.5);
        assert_eq!(exp(Case::ThmR, 3, 1.0, INF, 0.5), -3.0);
        assert_eq!(exp(Case::Crucial, 3, 1.0, INF, 2.0), -1.0);
        assert_eq!(exp(Case::Crucial, 5, 2.0, 2.0, 2.0), 0.0);
        assert_eq!(exp(Case::Theta1, 3, 1.0, INF, 1.0), -2.0);
        assert_eq!(lemma_exp_prediction(1, INF, 2.0, 1.0).unwrap().exponent, Some(-1.0));
        assert_eq!(lemma_exp_prediction(1, INF, 0.5, 0.0).unwrap().exponent, Some(-2.0));
    }

    #[test]
    fn log_laws() {
        let p = predicted_exponent(Case::ThmD, 2, 1.0, 2.0, 2.0).unwrap();
        assert_eq!((p.exponent, p.log_law), (None, LogLaw::SqrtLogT));
        let p = predicted_exponent(Case::ThmR, 2, 2.0, INF, 0.5).unwrap();
        assert_eq!(p.log_law, LogLaw::SqrtLogInvT);
        let p = predicted_exponent(Case::EffLow, 1, 1.0, INF, 0.5).unwrap();
        assert_eq!(p.exponent, Some(-0.5 / 1.5));
        let p = predicted_exponent(Case::EffLow, 2, 4.0, INF, 0.5).unwrap();
        assert_eq!(p.log_law, LogLaw::LogT);
        assert!(predicted_exponent(Case::Crucial, 2, 1.0, 2.0, 2.0).is_err());
        assert!(predicted_exponent(Case::CrucialLog, 2, 1.0, 2.0, 2.0).is_ok());
    }

    #[test]
    fn refusals() {
        assert!(predicted_exponent(Case::ThmD, 3, 1.0, INF, 1.0).is_err());
        assert!(predicted_exponent(Case::EffLow, 3, 1.0, 1.0, 0.0).is_err());
        assert!(predicted_exponent(Case::ThmR, 3, 1.0, INF, 0.0).is_err());
        let p = predicted_exponent(Case::ThmR, 3, 1.5, 2.0, 0.0).unwrap();
        assert!(!p.eps_loss && p.exponent == Some(1.0 - 3.0 * (1.0 / 1.5 - 0.5)));
        assert!(predicted_exponent(Case::EffHigh, 3, 1.0, INF, 2.5).is_err());
        assert!(predicted_exponent(Case::ThmD, 3, 2.0, 1.0, 2.0).is_err());
    }

    #[test]
    fn every_zoo_symbol_is_claimed_or_declined() {
        let pairs = [(1.0, 1.0), (1.0, 2.0), (1.0, INF), (2.0, 2.0), (2.0, INF), (4.0 / 3.0, 4.0)];
        for entry in zoo_catalog() {
            for n in 1..=3 {
                let Ok(sym) = model_zoo(entry.name, &BTreeMap::new(), n) else { continue };
                for band in [KernelBand::Low, KernelBand::Mid, KernelBand::High, KernelBand::Full] {
                    for &(p, q) in &pairs {
                        match claim_for(&sym, band, PQPair::new(p, q).unwrap()) {
                            Claim::Predicted(pr) => {
                                assert!(pr.exponent.is_some() != (pr.log_law != LogLaw::None));
                            }
                            Claim::NoClaim(why) => assert!(!why.is_empty()),
                        }
                    }
                }
            }
        }
    }
}
