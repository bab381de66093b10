//! Radial Fourier inversion
//!
//! `K(r) = (2π)^{−n/2} ∫₀^∞ m(ρ) ρ^{n−1} Λ_ν(rρ) dρ`,  `Λ_ν(z) = z^{−ν}J_ν(z)`,  `ν = n/2 − 1`,
//!
//! which is `(2π)^{−n} ∫ e^{ixξ} m(|ξ|) dξ` written in polar coordinates.
//!
//! Below `rρ = 30` the Bessel factor is evaluated directly and only the
//! waves of `m` are treated as oscillatory. Above it `J_ν` is replaced by
//! its Hankel form, so every piece becomes `G(ρ) e^{iΦ(ρ)}` with a slowly
//! varying `G` and `Φ ∈ {rρ, Φ_w ± rρ}`; panels spanning a large phase
//! change go to Levin collocation.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use super::bessel::{hankel_pq, lambda, ASYMPTOTIC_Z};
use super::multiplier::RadialMultiplier;
use super::profile::RadialProfile;
use super::quad::{adaptive_phase, gl_rule, Rule};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureSpec {
    /// Gauss–Legendre nodes per panel.
    pub panel_rule: usize,
    /// Frequency truncation.
    pub max_freq: f64,
    /// Panel width as a fraction of the Bessel oscillation period.
    pub osc_resolution: f64,
    pub target_abs_err: f64,
    /// Relative to `∫|integrand|`, per component.
    pub target_rel_err: f64,
    /// The probed weighted envelope is cut once it falls below this fraction of its peak.
    pub tail_rel: f64,
    pub max_panels: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            panel_rule: 16,
            max_freq: 1e12,
            osc_resolution: 0.25,
            target_abs_err: 1e-13,
            target_rel_err: 1e-11,
            tail_rel: 1e-12,
            max_panels: 20_000,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |reason: &str| {
            Err(Error::InvalidParams {
                name: "quadrature".into(),
                reason: reason.into(),
            })
        };
        if !(self.osc_resolution > 0.0 && self.osc_resolution <= 0.5) {
            return bad("osc_resolution must lie in (0, 1/2]");
        }
        if !(4..=128).contains(&self.panel_rule) {
            return bad("panel_rule must be between 4 and 128");
        }
        if !(self.max_freq > 0.0) || !(self.target_abs_err > 0.0) || !(self.target_rel_err > 0.0) {
            return bad("max_freq and error targets must be positive");
        }
        if !(self.tail_rel > 0.0 && self.tail_rel < 1.0) {
            return bad("tail_rel must lie in (0, 1)");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HankelPoint {
    pub value: f64,
    pub err: f64,
    pub converged: bool,
}

/// Radial inversion of `m` on every radius of `r_grid`, in parallel.
pub fn hankel_inverse(m: &RadialMultiplier, dim: usize, r_grid: &[f64], quad: &QuadratureSpec) -> Result<RadialProfile> {
    quad.validate()?;
    if dim == 0 {
        return Err(Error::Unsupported("dimension 0".into()));
    }
    let points: Vec<Result<HankelPoint>> = r_grid.par_iter().map(|&r| hankel_point(m, dim, r, quad)).collect();
    let mut values = Vec::with_capacity(r_grid.len());
    let mut errs = Vec::with_capacity(r_grid.len());
    let mut flagged = Vec::new();
    for (i, p) in points.into_iter().enumerate() {
        let p = p?;
        if !p.converged {
            flagged.push(i);
        }
        values.push(p.value);
        errs.push(p.err);
    }
    let mut prof = RadialProfile::new(dim, r_grid.to_vec(), values, errs)?;
    prof.flagged = flagged;
    Ok(prof)
}

/// Bound on `|Λ_ν(z)|` used for envelope probing.
fn lambda_envelope(nu: f64, z: f64) -> f64 {
    let at0 = 1.0 / (2f64.powf(nu) * gamma(nu + 1.0));
    if z <= 1.0 {
        at0
    } else {
        at0.min((2.0 / PI).sqrt() * z.powf(-nu - 0.5))
    }
}

/// `H(ρ)` with `ρ^{n−1}Λ_ν(rρ) = Re[H(ρ) e^{irρ}]` for `rρ ≥ 30`.
fn hankel_factor(nu: f64, dim: usize, r: f64, rho: f64) -> Complex64 {
    let z = r * rho;
    let (p, q) = hankel_pq(nu, z);
    let amp = rho.powi(dim as i32 - 1) * z.powf(-nu) * (2.0 / (PI * z)).sqrt();
    Complex64::new(p, q) * Complex64::from_polar(amp, -(0.5 * nu * PI + 0.25 * PI))
}

struct Probe {
    end: f64,
    tail: f64,
    peak: f64,
}

fn probe_envelope(m: &RadialMultiplier, dim: usize, nu: f64, r: f64, quad: &QuadratureSpec) -> Result<Probe> {
    let (lo, hi) = m.support();
    let hi_eff = hi.min(quad.max_freq);
    let weighted = |x: f64| m.envelope(x) * x.powi(dim as i32 - 1) * lambda_envelope(nu, r * x);
    let mut pts = vec![lo];
    let mut x = lo.max(1e-9);
    while x < hi_eff {
        if x > lo {
            pts.push(x);
        }
        x *= 1.1;
    }
    pts.push(hi_eff);
    let vals: Vec<f64> = pts.iter().map(|&x| weighted(x)).collect();
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonDecaying("envelope is not finite on the support".into()));
    }
    let peak = vals.iter().cloned().fold(0.0, f64::max);
    if peak == 0.0 {
        return Ok(Probe { end: lo, tail: 0.0, peak });
    }
    let last = vals.iter().rposition(|&v| v >= quad.tail_rel * peak).unwrap();
    if last + 1 < pts.len() {
        let end = pts[last + 1];
        let (e1, e0) = (vals[last + 1], vals[last]);
        let len = decay_length(pts[last], e0, end, e1);
        return Ok(Probe { end, tail: e1 * len, peak });
    }
    // Envelope still above the cut at the last probe.
    let end = hi_eff;
    if hi_eff >= hi {
        return Ok(Probe { end, tail: 0.0, peak });
    }
    let k = pts.len() - 1;
    let ratio = vals[k] / peak;
    let oscillatory = m.waves.iter().any(|w| w.lo <= end && w.hi > end);
    if !oscillatory && ratio > 1e-6 {
        return Err(Error::NonDecaying(format!(
            "weighted envelope at max_freq = {end:e} is {ratio:e} of its peak"
        )));
    }
    let mut len = decay_length(pts[k - 1], vals[k - 1], end, vals[k]);
    if oscillatory {
        let kappa = m.max_rate() + r;
        if kappa > 0.0 {
            len = len.min(2.0 / kappa);
        }
    }
    Ok(Probe {
        end,
        tail: vals[k] * len,
        peak,
    })
}

/// Length scale of an exponential through two envelope samples.
fn decay_length(x0: f64, e0: f64, x1: f64, e1: f64) -> f64 {
    if e1 > 0.0 && e0 > e1 {
        ((x1 - x0) / (e0 / e1).ln()).min(x1)
    } else {
        x1
    }
}

/// Panel edges for `[s0, s1]`: geometric away from zero, capped by the
/// envelope's log-derivative scale and, below the split, by the Bessel period.
fn panel_edges(m: &RadialMultiplier, s0: f64, s1: f64, bessel_cap: f64, out: &mut Vec<f64>) -> Result<()> {
    let floor = if s0 > 0.0 { 0.0 } else { (s1 - s0) / 1024.0 };
    let mut x = s0;
    out.push(x);
    while x < s1 {
        let mut h = (0.25 * x).max(floor).min(bessel_cap);
        let e0 = m.envelope(x.max(1e-300));
        let dx = 1e-3 * x.max(1e-12);
        let e1 = m.envelope(x + dx);
        if e0 > 0.0 && e1 > 0.0 {
            let d = (e1 / e0).ln().abs() / dx;
            if d > 0.0 {
                h = h.min(1.0 / d);
            }
        }
        let h = h.max((s1 - s0) * 1e-9).max(f64::EPSILON * x);
        x = (x + h).min(s1);
        if s1 - x < 1e-3 * h {
            x = s1;
        }
        out.push(x);
        if out.len() > 200_000 {
            return Err(Error::Quadrature("initial panel count exceeds 200000".into()));
        }
    }
    Ok(())
}

fn clip(edges: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    if !(hi > lo) {
        return Vec::new();
    }
    let mut v = vec![lo];
    v.extend(edges.iter().cloned().filter(|&e| e > lo && e < hi));
    v.push(hi);
    v
}

/// Single radius evaluation.
pub fn hankel_point(m: &RadialMultiplier, dim: usize, r: f64, quad: &QuadratureSpec) -> Result<HankelPoint> {
    let nu = dim as f64 / 2.0 - 1.0;
    let norm = (2.0 * PI).powf(-(dim as f64) / 2.0);
    let probe = probe_envelope(m, dim, nu, r, quad)?;
    if probe.peak == 0.0 {
        return Ok(HankelPoint {
            value: 0.0,
            err: 0.0,
            converged: true,
        });
    }
    let (lo, _) = m.support();
    let end = probe.end;
    let split = if r > 0.0 { ASYMPTOTIC_Z / r } else { f64::INFINITY };

    let mut cuts: Vec<f64> = vec![lo, end];
    cuts.extend(m.all_breakpoints().into_iter().filter(|&b| b > lo && b < end));
    if split > lo && split < end {
        cuts.push(split);
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();
    let mut edges = Vec::new();
    for w in cuts.windows(2) {
        let below = w[1] <= split;
        let mut rate = m.smooth_osc(w[0], w[1]);
        if below {
            rate += r;
        }
        let cap = if rate > 0.0 {
            quad.osc_resolution * 2.0 * PI / rate
        } else {
            f64::INFINITY
        };
        let mut seg = Vec::new();
        panel_edges(m, w[0], w[1], cap, &mut seg)?;
        if !edges.is_empty() {
            seg.remove(0);
        }
        edges.extend(seg);
    }

    let rule = gl_rule(quad.panel_rule);
    let comps = (m.smooth.len() + 2 * m.waves.len()).max(1) * 2;
    let abs_tol = quad.target_abs_err / norm / comps as f64;
    let mut acc = Accum::new(abs_tol, quad, &rule);
    let near_hi = split.min(end);
    let pw = |rho: f64| rho.powi(dim as i32 - 1);

    for p in &m.smooth {
        let e1 = clip(&edges, p.lo.max(lo), p.hi.min(near_hi));
        if e1.len() >= 2 {
            let g = |x: f64| Complex64::new((p.f)(x) * pw(x) * lambda(nu, r * x), 0.0);
            acc.add(&g, &|_| 0.0, &e1, Part::Re);
        }
        let e2 = clip(&edges, p.lo.max(split), p.hi.min(end));
        if e2.len() >= 2 {
            let g = |x: f64| hankel_factor(nu, dim, r, x) * (p.f)(x);
            acc.add(&g, &|x| r * x, &e2, Part::Re);
        }
    }
    for w in &m.waves {
        let e1 = clip(&edges, w.lo.max(lo), w.hi.min(near_hi));
        if e1.len() >= 2 {
            let g = |x: f64| Complex64::new((w.amp)(x) * pw(x) * lambda(nu, r * x), 0.0);
            acc.add(&g, &|x| (w.phase)(x), &e1, Part::Im);
        }
        let e2 = clip(&edges, w.lo.max(split), w.hi.min(end));
        if e2.len() >= 2 {
            let g1 = |x: f64| hankel_factor(nu, dim, r, x) * (0.5 * (w.amp)(x));
            acc.add(&g1, &|x| (w.phase)(x) + r * x, &e2, Part::Im);
            let g2 = |x: f64| hankel_factor(nu, dim, r, x).conj() * (0.5 * (w.amp)(x));
            acc.add(&g2, &|x| (w.phase)(x) - r * x, &e2, Part::Im);
        }
    }
    let value = norm * acc.value;
    let err = norm * (acc.err + probe.tail);
    if !value.is_finite() {
        return Err(Error::Quadrature(format!("non-finite kernel value at r = {r}")));
    }
    Ok(HankelPoint {
        value,
        err,
        converged: acc.converged,
    })
}

#[derive(Clone, Copy)]
enum Part {
    Re,
    Im,
}

struct Accum<'a> {
    value: f64,
    err: f64,
    converged: bool,
    abs_tol: f64,
    quad: &'a QuadratureSpec,
    rule: &'a Rule,
}

impl<'a> Accum<'a> {
    fn new(abs_tol: f64, quad: &'a QuadratureSpec, rule: &'a Rule) -> Self {
        Self {
            value: 0.0,
            err: 0.0,
            converged: true,
            abs_tol,
            quad,
            rule,
        }
    }

    fn add<G: Fn(f64) -> Complex64, P: Fn(f64) -> f64>(&mut self, g: &G, phase: &P, edges: &[f64], part: Part) {
        let max_panels = self.quad.max_panels.max(edges.len() + 16);
        let res = adaptive_phase(g, phase, edges, self.abs_tol, self.quad.target_rel_err, max_panels, self.rule);
        self.value += match part {
            Part::Re => res.value.re,
            Part::Im => res.value.im,
        };
        self.err += res.err;
        self.converged &= res.converged;
    }
}
