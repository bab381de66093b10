use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{eigenvalues, khat_mode, ModeState, Regime};
use crate::error::{Error, Result};
use crate::spectra::{RadialMultiplier, RealFn, SmoothPart, Wave};
use crate::symbolkit::{norm, sphere_directions, DissipationSymbol, RadialFn};

/// Smooth cutoff: 1 on `s ≤ 1`, 0 on `s ≥ 2`.
pub fn chi(s: f64) -> f64 {
    if s <= 1.0 {
        return 1.0;
    }
    if s >= 2.0 {
        return 0.0;
    }
    let sigma = |u: f64| (-1.0 / u).exp();
    let (p, q) = (sigma(2.0 - s), sigma(s - 1.0));
    p / (p + q)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Localizer {
    pub delta: f64,
    pub big_m: f64,
}

impl Localizer {
    /// Requires `4δ ≤ M`, so the low and high weights never overlap.
    pub fn new(delta: f64, big_m: f64) -> Result<Self> {
        if !(delta > 0.0) || !(4.0 * delta <= big_m) {
            return Err(Error::InvalidParams {
                name: "localizer".into(),
                reason: format!("need 0 < 4δ ≤ M, got δ = {delta}, M = {big_m}"),
            });
        }
        Ok(Self { delta, big_m })
    }

    pub fn for_symbol(sym: &DissipationSymbol) -> Result<Self> {
        Self::new(sym.delta, sym.big_m)
    }

    pub fn phi0(&self, rho: f64) -> f64 {
        chi(rho / (2.0 * self.delta))
    }

    pub fn phi1(&self, rho: f64) -> f64 {
        1.0 - chi(rho / self.big_m)
    }

    pub fn mid(&self, rho: f64) -> f64 {
        1.0 - self.phi0(rho) - self.phi1(rho)
    }

    pub fn weight(&self, band: KernelBand, rho: f64) -> f64 {
        match band {
            KernelBand::Full => 1.0,
            KernelBand::Low => self.phi0(rho),
            KernelBand::Mid => self.mid(rho),
            KernelBand::High => self.phi1(rho),
        }
    }

    /// `[lo, hi)` outside of which the band weight vanishes.
    pub fn support(&self, band: KernelBand) -> (f64, f64) {
        match band {
            KernelBand::Full => (0.0, f64::INFINITY),
            KernelBand::Low => (0.0, 4.0 * self.delta),
            KernelBand::Mid => (2.0 * self.delta, 2.0 * self.big_m),
            KernelBand::High => (self.big_m, f64::INFINITY),
        }
    }

    /// Plateau ends of the cutoffs.
    pub fn breakpoints(&self) -> Vec<f64> {
        vec![2.0 * self.delta, 4.0 * self.delta, self.big_m, 2.0 * self.big_m]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelBand {
    Full,
    Low,
    Mid,
    High,
}

impl KernelBand {
    pub fn as_str(&self) -> &'static str {
        match self {
            KernelBand::Full => "full",
            KernelBand::Low => "low",
            KernelBand::Mid => "mid",
            KernelBand::High => "high",
        }
    }
}

impl std::str::FromStr for KernelBand {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(KernelBand::Full),
            "low" => Ok(KernelBand::Low),
            "mid" => Ok(KernelBand::Mid),
            "high" => Ok(KernelBand::High),
            _ => Err(Error::Config(format!("unknown band `{s}`"))),
        }
    }
}

/// `K̂(t,ξ)` times the weight of one frequency band.
#[derive(Clone, Debug)]
pub struct SpectralKernel {
    pub sym: DissipationSymbol,
    pub band: KernelBand,
    pub loc: Localizer,
}

impl SpectralKernel {
    pub fn new(sym: DissipationSymbol, band: KernelBand) -> Result<Self> {
        let loc = Localizer::for_symbol(&sym)?;
        Ok(Self { sym, band, loc })
    }

    pub fn full(sym: DissipationSymbol) -> Result<Self> {
        Self::new(sym, KernelBand::Full)
    }

    pub fn with_band(&self, band: KernelBand) -> Self {
        Self { band, ..self.clone() }
    }

    pub fn eval(&self, t: f64, xi: &[f64]) -> f64 {
        let rho = norm(xi);
        let k = khat_mode(self.sym.evaluate(xi), rho, t);
        match self.band {
            KernelBand::Full => k,
            KernelBand::Low => k * self.loc.phi0(rho),
            KernelBand::High => k * self.loc.phi1(rho),
            // Defined as the remainder so the three bands add up to the full kernel.
            KernelBand::Mid => k - k * self.loc.phi0(rho) - k * self.loc.phi1(rho),
        }
    }

    /// Split a full kernel into its low, mid and high parts.
    pub fn localize(&self) -> Result<(Self, Self, Self)> {
        if self.band != KernelBand::Full {
            return Err(Error::InvalidParams {
                name: "localize".into(),
                reason: "only a full kernel can be localized".into(),
            });
        }
        Ok((
            self.with_band(KernelBand::Low),
            self.with_band(KernelBand::Mid),
            self.with_band(KernelBand::High),
        ))
    }

    /// `ρ ↦ K̂(t,ρ)·weight(ρ)` in wave/smooth form for radial inversion.
    pub fn radial_multiplier(&self, t: f64) -> Result<RadialMultiplier> {
        let a = self.sym.radial_fn().ok_or_else(|| {
            Error::Unsupported(format!("radial inversion of non-radial symbol `{}`", self.sym.label))
        })?;
        let loc = self.loc;
        let band = self.band;
        let weight: RealFn = Arc::new(move |r| loc.weight(band, r));
        let mut m = mode_multiplier(&a, t, self.loc.support(band), weight);
        m.breakpoints.extend(self.loc.breakpoints());
        m.label = format!("{}:{}:t={t}", self.sym.label, band.as_str());
        Ok(m)
    }
}

/// `f = √(1−b) ≥ 1/2`, i.e. `a ≤ √3·ρ`, is where the phase `tρf` is tame
/// enough to be handed to oscillatory quadrature.
pub(crate) fn wave_zone(a: f64, rho: f64) -> bool {
    a <= 3f64.sqrt() * rho
}

/// Split `[lo, hi)` into maximal pieces where the mode is written as a wave
/// (`true`) or kept as a function (`false`).
pub(crate) fn zones(a: &RadialFn, t: f64, lo: f64, hi: f64) -> Vec<(f64, f64, bool)> {
    let start = 4.0 / t;
    let test = |r: f64| r >= start && wave_zone(a(r), r);
    let scan_hi = hi.min(1e13);
    let mut cuts = vec![lo];
    if start > lo && start < hi {
        cuts.push(start);
    }
    let mut x = lo.max(1e-12);
    let mut prev: Option<(f64, bool)> = None;
    while x < scan_hi {
        let s = wave_zone(a(x), x);
        if let Some((px, ps)) = prev {
            if ps != s {
                let (mut l, mut r) = (px, x);
                for _ in 0..80 {
                    let mid = 0.5 * (l + r);
                    if wave_zone(a(mid), mid) == ps {
                        l = mid;
                    } else {
                        r = mid;
                    }
                }
                cuts.push(r);
            }
        }
        prev = Some((x, s));
        x *= 10f64.powf(1.0 / 40.0);
    }
    cuts.push(hi);
    cuts.sort_by(|p, q| p.partial_cmp(q).unwrap());
    cuts.dedup();
    let mut out: Vec<(f64, f64, bool)> = Vec::new();
    for w in cuts.windows(2) {
        if !(w[1] > w[0]) {
            continue;
        }
        let probe = if w[1].is_finite() {
            if w[0] > 0.0 {
                (w[0] * w[1]).sqrt()
            } else {
                0.5 * w[1]
            }
        } else {
            2.0 * w[0].max(1.0)
        };
        let z = test(probe);
        match out.last_mut() {
            Some(last) if last.2 == z && last.1 == w[0] => last.1 = w[1],
            _ => out.push((w[0], w[1], z)),
        }
    }
    out
}

/// Wave/smooth representation of `weight(ρ)·K̂(t,ρ)` on `support`.
pub(crate) fn mode_multiplier(a: &RadialFn, t: f64, support: (f64, f64), weight: RealFn) -> RadialMultiplier {
    let mut m = RadialMultiplier::default();
    if !(t > 0.0) {
        return m;
    }
    for (lo, hi, wave) in zones(a, t, support.0, support.1) {
        if wave {
            let (aa, wa, ap) = (a.clone(), weight.clone(), a.clone());
            m.waves.push(Wave {
                amp: Arc::new(move |r: f64| {
                    let av = aa(r);
                    wa(r) * (-0.5 * t * av).exp() / damped_scale(av, r)
                }),
                phase: Arc::new(move |r: f64| t * damped_scale(ap(r), r)),
                rate: t,
                lo,
                hi,
            });
        } else {
            let (aa, wa) = (a.clone(), weight.clone());
            m.smooth.push(SmoothPart {
                f: Arc::new(move |r: f64| {
                    let w = wa(r);
                    if w == 0.0 {
                        0.0
                    } else {
                        w * khat_mode(aa(r), r, t)
                    }
                }),
                lo,
                hi,
                osc: t,
            });
        }
    }
    m
}

/// `ρ·f = ρ√(1−b)`, written to avoid forming `b`.
pub(crate) fn damped_scale(a: f64, rho: f64) -> f64 {
    0.5 * ((2.0 * rho - a) * (2.0 * rho + a)).sqrt()
}

/// Decay rate of a single mode: `a/2` when it oscillates, `|λ₊|` when overdamped.
fn mode_rate(a: f64, rho: f64) -> f64 {
    match ModeState::new(a, rho).regime {
        Regime::Overdamping => -eigenvalues(a, rho).0.re,
        _ => 0.5 * a,
    }
}

/// `c = 0.9·min` of the mode decay rate over the mid band `[2δ, 2M]`,
/// sampled densely in radius and direction.
pub fn mid_band_constant(sym: &DissipationSymbol, loc: &Localizer) -> f64 {
    let dirs = if sym.is_radial {
        let mut e = vec![0.0; sym.dim];
        e[0] = 1.0;
        vec![e]
    } else {
        sphere_directions(sym.dim, 64)
    };
    let (lo, hi) = (2.0 * loc.delta, 2.0 * loc.big_m);
    let mut c = f64::INFINITY;
    let mut xi = vec![0.0; sym.dim];
    for i in 0..=2000 {
        let rho = lo * (hi / lo).powf(i as f64 / 2000.0);
        for d in &dirs {
            for (x, e) in xi.iter_mut().zip(d) {
                *x = rho * e;
            }
            c = c.min(mode_rate(sym.evaluate(&xi), rho));
        }
    }
    0.9 * c
}
