//! Experiment configuration documents (TOML).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norms::{fmt_exp, parse_exp, PQPair};
use crate::oscillator::KernelBand;
use crate::rates::{claim_for, log_grid, Claim, Tolerances};
use crate::spectra::QuadratureSpec;
use crate::symbolkit::{DissipationSymbol, SymbolDef};

/// What the experiment sweeps.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Kernel norms in `t`, band by band.
    #[default]
    Theorem,
    /// The oscillatory-diffusive family in `τ`.
    Crucial,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub from: f64,
    pub to: f64,
    pub points: usize,
}

impl SweepSpec {
    pub fn grid(&self) -> Vec<f64> {
        log_grid(self.from, self.to, self.points)
    }

    /// Power-law fits need 1.5 decades; the semi-log mid-band fit does not.
    fn validate(&self, what: &str, min_decades: f64) -> Result<()> {
        let ok = self.from > 0.0
            && self.to > self.from
            && self.points >= 8
            && (self.to / self.from).log10() >= min_decades - 1e-9;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "{what}: need 0 < from < to spanning {min_decades} decades with at least 8 points"
            )))
        }
    }
}

/// Optional fit window override; absent fields keep the defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSpec {
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    /// `false` keeps the transient decade on long sweeps.
    pub drop_transient_decade: Option<bool>,
}

/// A case that is expected to have no claim.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoClaimEntry {
    pub band: String,
    pub pair: String,
    pub dim: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub mode: Mode,
    /// Required in theorem mode.
    #[serde(default)]
    pub symbol: Option<SymbolDef>,
    #[serde(default = "default_bands")]
    pub bands: Vec<String>,
    /// Exponent pairs spelled `"p,q"`, with `inf` for ∞.
    pub pairs: Vec<String>,
    pub dims: Vec<usize>,
    pub sweep: SweepSpec,
    /// Per-band sweep overrides, e.g. a shorter grid for `mid`.
    #[serde(default)]
    pub band_sweeps: BTreeMap<String, SweepSpec>,
    /// Diffusion order of the crucial family.
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub fit: FitSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default)]
    pub expect_no_claim: Vec<NoClaimEntry>,
}

fn default_bands() -> Vec<String> {
    vec!["low".into()]
}

fn default_theta() -> f64 {
    2.0
}

fn default_output() -> PathBuf {
    PathBuf::from("dampwave-out")
}

pub fn parse_band(s: &str) -> Result<KernelBand> {
    match s {
        "low" => Ok(KernelBand::Low),
        "mid" => Ok(KernelBand::Mid),
        "high" => Ok(KernelBand::High),
        "full" => Ok(KernelBand::Full),
        _ => Err(Error::Config(format!("unknown band `{s}` (low, mid, high, full)"))),
    }
}

pub fn parse_pair(s: &str) -> Result<PQPair> {
    let (p, q) = s
        .split_once(',')
        .ok_or_else(|| Error::Config(format!("pair `{s}` is not of the form \"p,q\"")))?;
    PQPair::new(parse_exp(p)?, parse_exp(q)?).map_err(|e| Error::Config(e.to_string()))
}

/// One (band, pair, dim) combination after validation.
#[derive(Clone, Debug)]
pub struct Case {
    pub band: KernelBand,
    pub pair: PQPair,
    pub dim: usize,
    /// `Some(reason)` for cases listed under `expect_no_claim`.
    pub no_claim: Option<String>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn symbol_for(&self, dim: usize) -> Result<DissipationSymbol> {
        let def = self.symbol.as_ref().ok_or_else(|| Error::Config("`symbol` is required".into()))?;
        DissipationSymbol::from_def(def, dim)
    }

    pub fn sweep_for(&self, band: KernelBand) -> &SweepSpec {
        self.band_sweeps.get(band.as_str()).unwrap_or(&self.sweep)
    }

    fn expects_no_claim(&self, band: KernelBand, pair: &PQPair, dim: usize) -> Result<bool> {
        for e in &self.expect_no_claim {
            if parse_band(&e.band)? == band && parse_pair(&e.pair)? == *pair && e.dim.map_or(true, |d| d == dim) {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Checks the whole document and expands it into cases. Nothing is
    /// computed or written before this succeeds.
    pub fn validate(&self) -> Result<Vec<Case>> {
        if self.pairs.is_empty() {
            return Err(Error::Config("`pairs` is empty".into()));
        }
        if self.dims.is_empty() || self.dims.contains(&0) {
            return Err(Error::Config("`dims` must list dimensions ≥ 1".into()));
        }
        if self.mode == Mode::Theorem && self.bands.is_empty() {
            return Err(Error::Config("`bands` is empty".into()));
        }
        self.quadrature.validate().map_err(|e| Error::Config(e.to_string()))?;
        let decades = |b: KernelBand| if self.mode == Mode::Theorem && b == KernelBand::Mid { 0.0 } else { 1.5 };
        if self.mode == Mode::Crucial || self.bands.iter().any(|b| b != "mid" && !self.band_sweeps.contains_key(b)) {
            self.sweep.validate("sweep", 1.5)?;
        }
        for (b, s) in &self.band_sweeps {
            s.validate(&format!("band_sweeps.{b}"), decades(parse_band(b)?))?;
        }
        let pairs = self.pairs.iter().map(|s| parse_pair(s)).collect::<Result<Vec<_>>>()?;
        let bands = match self.mode {
            Mode::Theorem => self.bands.iter().map(|s| parse_band(s)).collect::<Result<Vec<_>>>()?,
            Mode::Crucial => {
                if !(self.theta > 0.0) {
                    return Err(Error::Config("`theta` must be > 0".into()));
                }
                vec![KernelBand::Full]
            }
        };
        let mut cases = Vec::new();
        for &dim in &self.dims {
            if self.mode == Mode::Crucial {
                cases.extend(pairs.iter().map(|&pair| Case { band: KernelBand::Full, pair, dim, no_claim: None }));
                continue;
            }
            let sym = self.symbol_for(dim).map_err(|e| Error::Config(e.to_string()))?;
            for &band in &bands {
                for &pair in &pairs {
                    let listed = self.expects_no_claim(band, &pair, dim)?;
                    let no_claim = match claim_for(&sym, band, pair) {
                        Claim::Predicted(_) if listed => {
                            return Err(Error::Config(format!(
                                "{} {} n={dim} is listed under expect_no_claim but has a prediction",
                                band.as_str(),
                                pair.label()
                            )))
                        }
                        Claim::Predicted(_) => None,
                        Claim::NoClaim(why) if listed => Some(why),
                        Claim::NoClaim(why) => {
                            return Err(Error::Config(format!(
                                "{} ({},{}) n={dim}: {why}; list it under expect_no_claim",
                                band.as_str(),
                                fmt_exp(pair.p),
                                fmt_exp(pair.q)
                            )))
                        }
                    };
                    cases.push(Case { band, pair, dim, no_claim });
                }
            }
        }
        Ok(cases)
    }
}

pub const VISCOELASTIC_N3: &str = include_str!("../../presets/viscoelastic_n3.toml");

/// Shipped configurations by name.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    match name {
        "viscoelastic_n3" => ExperimentConfig::from_toml(VISCOELASTIC_N3),
        _ => Err(Error::Config(format!("unknown preset `{name}` (viscoelastic_n3)"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_parses_and_validates() {
        let c = preset("viscoelastic_n3").unwrap();
        let cases = c.validate().unwrap();
        assert!(cases.iter().any(|c| c.pair.q.is_infinite() && c.band == KernelBand::Low));
    }

    #[test]
    fn rejects_empty_pairs_and_unlisted_no_claims() {
        let mut c = preset("viscoelastic_n3").unwrap();
        c.pairs.clear();
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        let mut c = preset("viscoelastic_n3").unwrap();
        c.bands = vec!["full".into()];
        assert!(c.validate().is_err());
        c.expect_no_claim = c
            .pairs
            .iter()
            .map(|p| NoClaimEntry { band: "full".into(), pair: p.clone(), dim: None })
            .collect();
        assert!(c.validate().unwrap().iter().all(|c| c.no_claim.is_some()));
    }

    #[test]
    fn pairs_and_roundtrip() {
        assert_eq!(parse_pair("1, inf").unwrap().q, f64::INFINITY);
        assert!(parse_pair("2,1").is_err());
        assert!(parse_pair("2").is_err());
        let c = preset("viscoelastic_n3").unwrap();
        assert_eq!(ExperimentConfig::from_toml(&c.to_toml()).unwrap(), c);
    }
}
