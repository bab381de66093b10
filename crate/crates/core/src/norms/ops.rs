//! Operator norms on `L^p → L^q`: exact values where the multiplier space is
//! explicit, an upper bound from Young's inequality and a lower bound from
//! rescaled test functions.

use std::sync::Arc;

use rayon::prelude::*;

use super::exponent::PQPair;
use super::lr::lr_norm_refined;
use super::report::{NormKind, NormMeta, NormReport};
use super::testfn::TestProfile;
use crate::error::{Error, Result};
use crate::spectra::{hankel_inverse, hankel_point, rgrid, QuadratureSpec, RadialMultiplier, RadialProfile};

type Refine<'a> = Option<&'a (dyn Fn(f64) -> f64 + Sync)>;

fn tagged(mut rep: NormReport, kind: NormKind, p: f64, q: f64) -> NormReport {
    rep.kind = kind;
    rep.p = Some(p);
    rep.q = Some(q);
    rep
}

/// `‖m‖_{M_1^q} = ‖F⁻¹m‖_{L^q}`. For `q = 1` this assumes the kernel is an
/// integrable function rather than a measure.
pub fn op_norm_exact_p1(kernel: &RadialProfile, q: f64, refine: Refine) -> Result<NormReport> {
    let pair = PQPair::new(1.0, q)?;
    op_norm_young(kernel, pair, refine, NormKind::OpExactP1)
}

/// `‖F⁻¹m‖_{L^r}` with `1 − 1/r = 1/p − 1/q`, an upper bound for `‖m‖_{M_p^q}`.
pub fn op_norm_upper_young(kernel: &RadialProfile, pair: PQPair, refine: Refine) -> Result<NormReport> {
    op_norm_young(kernel, pair, refine, NormKind::OpUpperYoung)
}

fn op_norm_young(kernel: &RadialProfile, pair: PQPair, refine: Refine, kind: NormKind) -> Result<NormReport> {
    let r = pair.young_exponent();
    Ok(tagged(lr_norm_refined(kernel, r, refine)?, kind, pair.p, pair.q))
}

/// Default radial probe for multiplier suprema: `0` and `10⁻⁸ … 10⁸`.
pub fn default_probe() -> Vec<f64> {
    let mut g = vec![0.0];
    g.extend(rgrid::geometric(1e-8, 1e8, 1601));
    g
}

/// `‖m‖_{M_2^2} = sup|m|`, sampled on `probe` and refined around every local
/// maximum within a factor two of the best sample.
pub fn op_norm_exact_p2q2(m: &(dyn Fn(f64) -> f64 + Sync), probe: &[f64]) -> Result<NormReport> {
    if probe.is_empty() {
        return Err(Error::InvalidParams {
            name: "probe".into(),
            reason: "empty probe grid".into(),
        });
    }
    let v: Vec<f64> = probe.par_iter().map(|&x| m(x).abs()).collect();
    if let Some(i) = v.iter().position(|x| !x.is_finite()) {
        return Err(Error::NotApplicable(format!("multiplier unbounded near |ξ| = {}", probe[i])));
    }
    let best = v.iter().cloned().fold(0.0, f64::max);
    let mut sup = best;
    for i in 0..v.len() {
        let left = if i > 0 { v[i - 1] } else { f64::NEG_INFINITY };
        let right = if i + 1 < v.len() { v[i + 1] } else { f64::NEG_INFINITY };
        if v[i] >= left && v[i] >= right && v[i] >= 0.5 * best {
            let lo = probe[i.saturating_sub(1)];
            let hi = probe[(i + 1).min(probe.len() - 1)];
            if hi > lo {
                sup = sup.max(golden_max(m, lo, hi));
            }
        }
    }
    Ok(NormReport {
        kind: NormKind::OpExactP2Q2,
        value: sup,
        r: None,
        p: Some(2.0),
        q: Some(2.0),
        quad_error: 0.0,
        flagged: false,
        meta: NormMeta::default(),
    })
}

fn golden_max(m: &(dyn Fn(f64) -> f64 + Sync), mut a: f64, mut b: f64) -> f64 {
    let g = |x: f64| m(x).abs();
    let k = 0.5 * (5f64.sqrt() - 1.0);
    let (mut c, mut d) = (b - k * (b - a), a + k * (b - a));
    let (mut gc, mut gd) = (g(c), g(d));
    for _ in 0..60 {
        if gc > gd {
            b = d;
            d = c;
            gd = gc;
            c = b - k * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + k * (b - a);
            gd = g(d);
        }
    }
    gc.max(gd)
}

/// `‖F⁻¹(m·ĝ_τ)‖_{L^q} / ‖g_τ‖_{L^p}`, a lower bound for `‖m‖_{M_p^q}` up to
/// the reported quadrature error. `r_grid` should resolve where the filtered
/// kernel concentrates.
pub fn op_norm_lower_test(
    m: &RadialMultiplier,
    dim: usize,
    pair: PQPair,
    tau: f64,
    g: &TestProfile,
    r_grid: &[f64],
    quad: &QuadratureSpec,
) -> Result<NormReport> {
    if !(tau > 0.0) {
        return Err(Error::InvalidParams {
            name: "tau".into(),
            reason: format!("scale must be positive, got {tau}"),
        });
    }
    if g.dim != dim {
        return Err(Error::InvalidParams {
            name: "test profile".into(),
            reason: format!("profile is {}-dimensional, kernel is {dim}-dimensional", g.dim),
        });
    }
    let gc = *g;
    let p = pair.p;
    let filtered = m.times(Arc::new(move |rho| gc.ghat_scaled(p, tau, rho)));
    let kernel = hankel_inverse(&filtered, dim, r_grid, quad)?;
    let refine = |r: f64| hankel_point(&filtered, dim, r, quad).map(|h| h.value).unwrap_or(0.0);
    let refine: Refine = if pair.q.is_infinite() { Some(&refine) } else { None };
    let num = lr_norm_refined(&kernel, pair.q, refine)?;
    let den = g.lp_norm(p);
    let mut rep = tagged(num, NormKind::OpLowerTest, pair.p, pair.q);
    rep.r = None;
    rep.value /= den;
    rep.quad_error /= den;
    rep.meta.tau = Some(tau);
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::hankel_inverse;
    use std::f64::consts::PI;

    fn quad() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn exact_p1_gaussian() {
        let m = RadialMultiplier::from_fn(|r| (-r * r).exp());
        let k = hankel_inverse(&m, 1, &rgrid::uniform(0.0, 20.0, 201), &quad()).unwrap();
        let rep = op_norm_exact_p1(&k, f64::INFINITY, None).unwrap();
        assert!((rep.value - (4.0 * PI).powf(-0.5)).abs() < 1e-9);
        assert_eq!(rep.kind, NormKind::OpExactP1);
    }

    #[test]
    fn young_with_p1_is_exact_path() {
        let m = RadialMultiplier::from_fn(|r| (-r * r).exp());
        let k = hankel_inverse(&m, 3, &rgrid::uniform(0.0, 20.0, 201), &quad()).unwrap();
        for &q in &[1.0, 1.7, 3.0, f64::INFINITY] {
            let a = op_norm_exact_p1(&k, q, None).unwrap();
            let b = op_norm_upper_young(&k, PQPair::new(1.0, q).unwrap(), None).unwrap();
            assert_eq!(a.value.to_bits(), b.value.to_bits());
        }
    }

    #[test]
    fn plancherel_for_q2() {
        // ‖F⁻¹m‖₂ = (2π)^{−n/2}‖m‖₂; for m = e^{−ρ²} in n = 3, ‖m‖₂² = (π/2)^{3/2}.
        let m = RadialMultiplier::from_fn(|r| (-r * r).exp());
        let k = hankel_inverse(&m, 3, &rgrid::uniform(0.0, 20.0, 401), &quad()).unwrap();
        let rep = op_norm_exact_p1(&k, 2.0, None).unwrap();
        let expect = (2.0 * PI).powf(-1.5) * (0.5 * PI).powf(0.75);
        assert!((rep.value / expect - 1.0).abs() < 1e-4);
    }

    #[test]
    fn p2q2_examples() {
        let probe = default_probe();
        let t = 3.0;
        let free = |r: f64| crate::oscillator::khat_mode(0.0, r, t);
        assert!((op_norm_exact_p2q2(&free, &probe).unwrap().value - t).abs() < 1e-12);
        let classical = |r: f64| crate::oscillator::khat_mode(1.0, r, 1.0);
        let v = op_norm_exact_p2q2(&classical, &probe).unwrap().value;
        assert!((v - (1.0 - (-1f64).exp())).abs() < 1e-9);
        let peaked = |r: f64| (-(r - 1.2345f64).powi(2) * 1e4).exp();
        assert!((op_norm_exact_p2q2(&peaked, &probe).unwrap().value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn lower_test_identity_multiplier() {
        let m = RadialMultiplier::from_fn(|_| 1.0);
        let pair = PQPair::new(1.0, 2.0).unwrap();
        for n in [1, 3] {
            let g = TestProfile::default_for(n);
            for &tau in &[0.5, 0.1] {
                let grid = rgrid::uniform(0.0, 12.0 * tau, 241);
                let rep = op_norm_lower_test(&m, n, pair, tau, &g, &grid, &quad()).unwrap();
                let expect = tau.powf(n as f64 * (0.5 - 1.0)) * g.lp_norm(2.0) / g.lp_norm(1.0);
                assert!((rep.value / expect - 1.0).abs() < 1e-6, "n={n} tau={tau} {} {expect}", rep.value);
            }
        }
    }

    #[test]
    fn sandwich_on_gaussian() {
        let m = RadialMultiplier::from_fn(|r| (-r * r).exp());
        let pair = PQPair::new(4.0 / 3.0, 4.0).unwrap();
        let k = hankel_inverse(&m, 1, &rgrid::uniform(0.0, 20.0, 401), &quad()).unwrap();
        let up = op_norm_upper_young(&k, pair, None).unwrap();
        assert_eq!(up.value.to_bits(), lr_norm_refined(&k, 2.0, None).unwrap().value.to_bits());
        let g = TestProfile::default_for(1);
        for &tau in &[2.0, 1.0, 0.3] {
            let grid = rgrid::uniform(0.0, 20.0 + 10.0 * tau, 401);
            let lo = op_norm_lower_test(&m, 1, pair, tau, &g, &grid, &quad()).unwrap();
            assert!(lo.value <= up.value * (1.0 + 1e-2), "tau={tau}");
        }
    }
}
