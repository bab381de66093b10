//! Dissipation symbols `a(ξ)`, the model zoo and a numerical
//! Mikhlin–Hörmander checker.

mod mh;
mod zoo;

pub use mh::{mh_check, mh_check_with, Band, MhOptions, MhReport};
pub use zoo::{model_zoo, zoo_catalog, ZooEntry};

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub type Evaluator = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type RadialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Declarative description of a symbol; hashed into cache keys.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SymbolDef {
    Zoo {
        name: String,
        #[serde(default)]
        params: BTreeMap<String, f64>,
    },
    Custom(CustomSpec),
}

/// Radial rational symbol `Σ cᵢ ρ^{pᵢ} / Σ dⱼ ρ^{qⱼ}` with user supplied metadata.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CustomSpec {
    pub numerator: Vec<Term>,
    #[serde(default = "unit_denominator")]
    pub denominator: Vec<Term>,
    pub theta0: f64,
    pub theta1: f64,
    pub delta: f64,
    pub big_m: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coef: f64,
    pub power: f64,
}

fn unit_denominator() -> Vec<Term> {
    vec![Term {
        coef: 1.0,
        power: 0.0,
    }]
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolFlags {
    /// High-frequency order is negative; rate claims are unsupported.
    pub regularity_loss: bool,
    /// High-frequency growth is logarithmic rather than a power.
    pub log_high: bool,
    /// Deliberately outside the hypotheses (perturbation and control cases).
    pub screening_only: bool,
}

#[derive(Clone)]
pub struct DissipationSymbol {
    pub def: SymbolDef,
    pub dim: usize,
    pub theta0: f64,
    pub theta1: f64,
    pub a1: f64,
    pub delta: f64,
    pub big_m: f64,
    pub is_radial: bool,
    pub label: String,
    pub flags: SymbolFlags,
    evaluate: Evaluator,
    radial: Option<RadialFn>,
}

impl fmt::Debug for DissipationSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DissipationSymbol")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("theta0", &self.theta0)
            .field("theta1", &self.theta1)
            .field("a1", &self.a1)
            .field("delta", &self.delta)
            .field("big_m", &self.big_m)
            .field("is_radial", &self.is_radial)
            .field("flags", &self.flags)
            .finish()
    }
}

pub(crate) struct Raw {
    pub def: SymbolDef,
    pub dim: usize,
    pub theta0: f64,
    pub theta1: f64,
    pub label: String,
    pub flags: SymbolFlags,
    pub radial: Option<RadialFn>,
    pub evaluate: Option<Evaluator>,
}

impl DissipationSymbol {
    pub fn evaluate(&self, xi: &[f64]) -> f64 {
        (self.evaluate)(xi)
    }

    /// `a` as a function of `|ξ|`; only for radial symbols.
    pub fn radial_value(&self, rho: f64) -> Option<f64> {
        self.radial.as_ref().map(|f| f(rho))
    }

    pub fn radial_fn(&self) -> Option<RadialFn> {
        self.radial.clone()
    }

    pub fn evaluator(&self) -> Evaluator {
        self.evaluate.clone()
    }

    /// Short content hash of the definition and dimension.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(&(&self.def, self.dim)).expect("symbol def serializes");
        let digest = Sha256::digest(&bytes);
        hex::encode(&digest[..8])
    }

    pub fn definition_bytes(&self) -> Vec<u8> {
        serde_json::to_vec(&(&self.def, self.dim)).expect("symbol def serializes")
    }

    /// Build from a definition, choosing `(δ, M)` automatically for zoo entries.
    pub fn from_def(def: &SymbolDef, dim: usize) -> Result<Self> {
        match def {
            SymbolDef::Zoo { name, params } => model_zoo(name, params, dim),
            SymbolDef::Custom(spec) => Self::custom(spec.clone(), dim),
        }
    }

    pub fn custom(spec: CustomSpec, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("custom", "dimension must be ≥ 1"));
        }
        if spec.numerator.is_empty() || spec.denominator.is_empty() {
            return Err(invalid("custom", "numerator and denominator must be nonempty"));
        }
        if !(spec.delta > 0.0 && spec.big_m > 0.0 && 4.0 * spec.delta <= spec.big_m) {
            return Err(invalid("custom", "need 0 < 4δ ≤ M"));
        }
        if spec.theta0 < 0.0 || !spec.theta0.is_finite() || !spec.theta1.is_finite() {
            return Err(invalid("custom", "orders must be finite with θ₀ ≥ 0"));
        }
        let num = spec.numerator.clone();
        let den = spec.denominator.clone();
        let f: RadialFn = Arc::new(move |rho: f64| {
            let p: f64 = num.iter().map(|t| t.coef * rho.powf(t.power)).sum();
            let q: f64 = den.iter().map(|t| t.coef * rho.powf(t.power)).sum();
            p / q
        });
        let raw = Raw {
            def: SymbolDef::Custom(spec.clone()),
            dim,
            theta0: spec.theta0,
            theta1: spec.theta1,
            label: "custom".into(),
            flags: SymbolFlags::default(),
            radial: Some(f),
            evaluate: None,
        };
        let mut sym = raw.into_symbol(spec.delta, spec.big_m);
        verify_positive(&sym)?;
        verify_normalization(&sym)?;
        sym.a1 = estimate_a1(&sym);
        Ok(sym)
    }

    /// The undamped control case `a ≡ 0`; not a dissipative symbol.
    pub fn free_wave(dim: usize) -> Self {
        let raw = Raw {
            def: SymbolDef::Zoo {
                name: "free_wave".into(),
                params: BTreeMap::new(),
            },
            dim,
            theta0: 0.0,
            theta1: 0.0,
            label: "free_wave".into(),
            flags: SymbolFlags {
                screening_only: true,
                ..Default::default()
            },
            radial: Some(Arc::new(|_| 0.0)),
            evaluate: None,
        };
        let mut sym = raw.into_symbol(0.25, 4.0);
        sym.a1 = 0.0;
        sym
    }

    /// Directions used for dense sampling of non-radial symbols.
    pub(crate) fn probe_directions(&self) -> Vec<Vec<f64>> {
        if self.is_radial {
            let mut e = vec![0.0; self.dim];
            e[0] = 1.0;
            return vec![e];
        }
        sphere_directions(self.dim, 48)
    }
}

impl Raw {
    pub(crate) fn into_symbol(self, delta: f64, big_m: f64) -> DissipationSymbol {
        let is_radial = self.radial.is_some();
        let evaluate = match (self.evaluate, &self.radial) {
            (Some(e), _) => e,
            (None, Some(f)) => {
                let f = f.clone();
                Arc::new(move |xi: &[f64]| f(norm(xi))) as Evaluator
            }
            (None, None) => unreachable!("symbol needs an evaluator"),
        };
        DissipationSymbol {
            def: self.def,
            dim: self.dim,
            theta0: self.theta0,
            theta1: self.theta1,
            a1: 1.0,
            delta,
            big_m,
            is_radial,
            label: self.label,
            flags: self.flags,
            evaluate,
            radial: self.radial,
        }
    }
}

pub(crate) fn invalid(name: &str, reason: &str) -> Error {
    Error::InvalidParams {
        name: name.into(),
        reason: reason.into(),
    }
}

pub fn norm(xi: &[f64]) -> f64 {
    xi.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Deterministic, roughly uniform unit vectors in `R^dim`.
pub fn sphere_directions(dim: usize, count: usize) -> Vec<Vec<f64>> {
    let mut dirs = Vec::with_capacity(count + 2 * dim);
    for j in 0..dim {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; dim];
            e[j] = s;
            dirs.push(e);
        }
    }
    if dim == 1 {
        return dirs;
    }
    // Additive recurrence on the torus mapped through Gaussian coordinates.
    let alphas: Vec<f64> = (0..dim)
        .map(|j| {
            let p = [2.0f64, 3.0, 5.0, 7.0, 11.0, 13.0, 17.0, 19.0, 23.0][j % 9];
            p.sqrt().fract()
        })
        .collect();
    let mut k = 1usize;
    while dirs.len() < count + 2 * dim {
        let v: Vec<f64> = (0..dim)
            .map(|j| {
                let u = ((k as f64) * alphas[j] + 0.5).fract();
                let u = u.clamp(1e-6, 1.0 - 1e-6);
                // Logit approximates a symmetric spread; normalization fixes length.
                (u / (1.0 - u)).ln()
            })
            .collect();
        let l = norm(&v);
        if l > 1e-8 {
            dirs.push(v.iter().map(|x| x / l).collect());
        }
        k += 1;
    }
    dirs
}

fn sample_radii(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (llo + (lhi - llo) * (i as f64 + 0.5) / count as f64).exp())
        .collect()
}

pub(crate) fn low_radii(delta: f64) -> Vec<f64> {
    // φ₀ is supported up to 4δ, so the normalization is checked there.
    sample_radii(4.0 * delta * 2f64.powi(-24), 4.0 * delta, 400)
}

pub(crate) fn high_radii(big_m: f64) -> Vec<f64> {
    sample_radii(big_m, big_m * 2f64.powi(16), 400)
}

fn each_sample<F: FnMut(f64, f64)>(sym: &DissipationSymbol, radii: &[f64], mut visit: F) {
    let dirs = sym.probe_directions();
    let mut xi = vec![0.0; sym.dim];
    for &r in radii {
        for d in &dirs {
            for (x, e) in xi.iter_mut().zip(d) {
                *x = r * e;
            }
            visit(r, sym.evaluate(&xi));
        }
    }
}

fn verify_positive(sym: &DissipationSymbol) -> Result<()> {
    let mut radii = low_radii(sym.delta);
    radii.extend(sample_radii(sym.delta, sym.big_m, 200));
    radii.extend(high_radii(sym.big_m));
    let mut bad = None;
    each_sample(sym, &radii, |r, a| {
        if bad.is_none() && !(a > 0.0 && a.is_finite()) {
            bad = Some((r, a));
        }
    });
    match bad {
        Some((r, a)) => Err(Error::NotDissipative {
            at: format!("|ξ|={r:e}"),
            value: a,
        }),
        None => Ok(()),
    }
}

/// Whether `a ≤ |ξ|` (`upper`) or `a ≥ 4|ξ|` holds at all sampled points.
fn band_inequality(sym: &DissipationSymbol, radii: &[f64], upper: bool) -> bool {
    let mut ok = true;
    each_sample(sym, radii, |r, a| {
        if upper {
            ok &= a <= r;
        } else {
            ok &= a >= 4.0 * r;
        }
    });
    ok
}

pub(crate) fn low_normalization_holds(sym: &DissipationSymbol) -> bool {
    let radii = low_radii(sym.delta);
    if sym.theta0 > 1.0 {
        band_inequality(sym, &radii, true)
    } else if sym.theta0 < 1.0 {
        band_inequality(sym, &radii, false)
    } else {
        true
    }
}

pub(crate) fn high_normalization_holds(sym: &DissipationSymbol) -> bool {
    let radii = high_radii(sym.big_m);
    if sym.theta1 > 1.0 {
        band_inequality(sym, &radii, false)
    } else if sym.theta1 < 1.0 {
        band_inequality(sym, &radii, true)
    } else {
        true
    }
}

fn verify_normalization(sym: &DissipationSymbol) -> Result<()> {
    if !low_normalization_holds(sym) {
        return Err(Error::Normalization(format!(
            "low band inequality fails for δ={}",
            sym.delta
        )));
    }
    if !high_normalization_holds(sym) {
        return Err(Error::Normalization(format!(
            "high band inequality fails for M={}",
            sym.big_m
        )));
    }
    Ok(())
}

/// Sampled `min(inf_low a|ξ|^{-θ₀}, inf_high a|ξ|^{-θ₁})`.
pub(crate) fn estimate_a1(sym: &DissipationSymbol) -> f64 {
    let mut lo = f64::INFINITY;
    each_sample(sym, &low_radii(sym.delta), |r, a| {
        lo = lo.min(a * r.powf(-sym.theta0));
    });
    let mut hi = f64::INFINITY;
    each_sample(sym, &high_radii(sym.big_m), |r, a| {
        hi = hi.min(a * r.powf(-sym.theta1));
    });
    lo.min(hi)
}

/// Largest dyadic `δ ≤ 1/4` satisfying the low-band normalization.
pub(crate) fn choose_delta(sym: &mut DissipationSymbol) -> Result<()> {
    for k in 2..40 {
        sym.delta = 2f64.powi(-k);
        if low_normalization_holds(sym) {
            return Ok(());
        }
    }
    Err(Error::Normalization(format!("no admissible δ for {}", sym.label)))
}

/// Smallest dyadic `M ≥ max(1, 16δ)` satisfying the high-band normalization.
pub(crate) fn choose_big_m(sym: &mut DissipationSymbol) -> Result<()> {
    let start = (16.0 * sym.delta).max(1.0).log2().ceil() as i32;
    for k in start..start + 40 {
        sym.big_m = 2f64.powi(k);
        if high_normalization_holds(sym) {
            return Ok(());
        }
    }
    Err(Error::Normalization(format!("no admissible M for {}", sym.label)))
}

pub(crate) fn finish(raw: Raw) -> Result<DissipationSymbol> {
    let mut sym = raw.into_symbol(0.25, 4.0);
    choose_delta(&mut sym)?;
    choose_big_m(&mut sym)?;
    verify_positive(&sym)?;
    sym.a1 = estimate_a1(&sym);
    Ok(sym)
}
