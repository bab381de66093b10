//! Norm sweeps over log-spaced times or scales.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::Sample;
use super::grid::{bandwidth, plan_for_multiplier, profile_on_plan, GridPlan};
use crate::error::{Error, Result};
use crate::norms::{
    default_probe, lr_norm_grid, lr_norm_refined, op_norm_exact_p1, op_norm_exact_p2q2, op_norm_lower_test,
    op_norm_upper_young, NormKind, NormMeta, NormReport, PQPair, TestProfile,
};
use crate::oscillator::SpectralKernel;
use crate::symbolkit::sphere_directions;
use crate::spectra::{fft_inverse, hankel_point, GridSpec, QuadratureSpec, RadialMultiplier, RadialProfile};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Transform {
    Hankel,
    /// Lattice FFT with the half-width `extent_factor·(t + 1)`.
    Fft { points_per_axis: usize, extent_factor: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    pub kind: NormKind,
    pub pair: PQPair,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub x: f64,
    pub report: Option<NormReport>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub label: String,
    /// `t` or `tau`.
    pub param: String,
    pub spec: NormSpec,
    pub points: Vec<SweepPoint>,
}

impl SweepTable {
    pub fn samples(&self) -> Vec<Sample> {
        self.points
            .iter()
            .filter_map(|p| {
                p.report.as_ref().filter(|r| !r.flagged).map(|r| Sample {
                    x: p.x,
                    value: r.value,
                    quad_error: r.quad_error,
                })
            })
            .collect()
    }

    pub fn failures(&self) -> usize {
        self.points.iter().filter(|p| p.report.is_none()).count()
    }
}

/// Where radial kernel profiles come from; the CLI supplies a caching one.
pub trait ProfileSource: Sync {
    fn profile(&self, key: &ProfileKey, m: &RadialMultiplier, plan: &GridPlan, quad: &QuadratureSpec) -> Result<RadialProfile>;
}

/// Identity of a profile request, used by caches.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileKey {
    pub definition: String,
    pub dim: usize,
    pub band: String,
    pub t: f64,
}

pub struct Direct;

impl ProfileSource for Direct {
    fn profile(&self, key: &ProfileKey, m: &RadialMultiplier, plan: &GridPlan, quad: &QuadratureSpec) -> Result<RadialProfile> {
        profile_on_plan(m, key.dim, plan, quad)
    }
}

/// Log-spaced grid of `points` values from `lo` to `hi`.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    crate::spectra::rgrid::geometric(lo, hi, points)
}

/// At least 8 positive points spanning `min_decades`.
pub fn check_grid(grid: &[f64], min_decades: f64) -> Result<()> {
    let (min, max) = grid.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    if grid.len() < 8 || !(min > 0.0) || (max / min).log10() < min_decades - 1e-9 {
        return Err(Error::InvalidParams {
            name: "sweep grid".into(),
            reason: format!("need at least 8 positive points spanning {min_decades} decades"),
        });
    }
    Ok(())
}

/// Spatial scale used for the test function of lower-bound sweeps.
pub fn test_scale(m: &RadialMultiplier) -> f64 {
    1.0 / bandwidth(m)
}

/// One norm of `F⁻¹m` (or of `m` itself for `M_2^2`).
pub fn multiplier_norm(
    m: &RadialMultiplier,
    dim: usize,
    spec: &NormSpec,
    front: Option<f64>,
    tau: Option<f64>,
    quad: &QuadratureSpec,
    load: &dyn Fn(&GridPlan) -> Result<RadialProfile>,
) -> Result<NormReport> {
    let refine = |r: f64| hankel_point(m, dim, r, quad).map(|h| h.value).unwrap_or(0.0);
    let plan = plan_for_multiplier(m, front);
    match spec.kind {
        NormKind::OpExactP2Q2 => op_norm_exact_p2q2(&|r| m.eval(r), &default_probe()),
        NormKind::OpLowerTest => {
            let red = spec.pair.reduced();
            let tau = tau.unwrap_or_else(|| test_scale(m));
            let g = TestProfile::default_for(dim);
            let filtered = m.times(std::sync::Arc::new(move |r| g.ghat_scaled(red.p, tau, r)));
            let grid = profile_on_plan(&filtered, dim, &plan_for_multiplier(&filtered, front), quad)?.r_grid;
            op_norm_lower_test(m, dim, red, tau, &g, &grid, quad)
        }
        kind => {
            let prof = load(&plan)?;
            let r = match kind {
                NormKind::OpUpperYoung => spec.pair.young_exponent(),
                _ => spec.pair.q,
            };
            let refine: Option<&(dyn Fn(f64) -> f64 + Sync)> = if r.is_infinite() { Some(&refine) } else { None };
            match kind {
                NormKind::Lr => lr_norm_refined(&prof, r, refine),
                NormKind::OpExactP1 => op_norm_exact_p1(&prof, r, refine),
                _ => op_norm_upper_young(&prof, spec.pair, refine),
            }
        }
    }
}

/// Wave front radius of `F⁻¹m`, when `m` carries waves.
pub fn front_of(m: &RadialMultiplier) -> Option<f64> {
    (!m.waves.is_empty()).then(|| m.max_rate())
}

/// Norm of `K(t,·)` for every `t` in `grid`; per-point failures are recorded.
pub fn sweep_norms(
    kernel: &SpectralKernel,
    spec: NormSpec,
    grid: &[f64],
    transform: Transform,
    quad: &QuadratureSpec,
    source: &dyn ProfileSource,
) -> Result<SweepTable> {
    check_grid(grid, 0.0)?;
    let dim = kernel.sym.dim;
    let point = |t: f64| -> Result<NormReport> {
        let meta = NormMeta {
            t: Some(t),
            tau: None,
            symbol_hash: kernel.sym.hash(),
            band: kernel.band.as_str().into(),
        };
        let rep = match transform {
            Transform::Hankel => {
                let m = kernel.radial_multiplier(t)?;
                let key = ProfileKey {
                    definition: String::from_utf8_lossy(&kernel.sym.definition_bytes()).into_owned(),
                    dim,
                    band: kernel.band.as_str().into(),
                    t,
                };
                multiplier_norm(&m, dim, &spec, front_of(&m), None, quad, &|plan| source.profile(&key, &m, plan, quad))?
            }
            Transform::Fft { points_per_axis, extent_factor } => {
                if spec.kind == NormKind::OpExactP2Q2 {
                    // Non-radial symbols: sup over radii along a fixed set of directions.
                    let dirs = sphere_directions(dim, 64);
                    let f = |r: f64| {
                        dirs.iter()
                            .map(|d| {
                                let xi: Vec<f64> = d.iter().map(|c| c * r).collect();
                                kernel.eval(t, &xi).abs()
                            })
                            .fold(0.0, f64::max)
                    };
                    op_norm_exact_p2q2(&f, &default_probe())?
                } else {
                    let gs = GridSpec {
                        dim,
                        extent: extent_factor * (t + 1.0),
                        points_per_axis,
                    };
                    let field = fft_inverse(&|xi: &[f64]| kernel.eval(t, xi), &gs)?;
                    let r = match spec.kind {
                        NormKind::OpUpperYoung => spec.pair.young_exponent(),
                        _ => spec.pair.q,
                    };
                    let mut rep = lr_norm_grid(&field, r)?;
                    rep.kind = spec.kind;
                    rep.p = Some(spec.pair.p);
                    rep.q = Some(spec.pair.q);
                    rep
                }
            }
        };
        Ok(rep.with_meta(meta))
    };
    let points: Vec<SweepPoint> = grid
        .par_iter()
        .map(|&t| match point(t) {
            Ok(r) => SweepPoint { x: t, report: Some(r), error: None },
            Err(e) => SweepPoint { x: t, report: None, error: Some(e.to_string()) },
        })
        .collect();
    if points.iter().all(|p| p.report.is_none()) {
        return Err(Error::Quadrature(format!(
            "every sweep point failed, first: {}",
            points[0].error.clone().unwrap_or_default()
        )));
    }
    Ok(SweepTable {
        label: format!("{}:{}", kernel.sym.label, kernel.band.as_str()),
        param: "t".into(),
        spec,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oscillator::KernelBand;
    use crate::symbolkit::model_zoo;
    use std::collections::BTreeMap;

    fn kernel(name: &str, n: usize, band: KernelBand) -> SpectralKernel {
        SpectralKernel::new(model_zoo(name, &BTreeMap::new(), n).unwrap(), band).unwrap()
    }

    #[test]
    fn classical_sup_decreases() {
        let k = kernel("classical", 1, KernelBand::Low);
        let spec = NormSpec {
            kind: NormKind::OpExactP1,
            pair: PQPair::new(1.0, f64::INFINITY).unwrap(),
        };
        let grid = log_grid(10.0, 1e3, 8);
        let tab = sweep_norms(&k, spec, &grid, Transform::Hankel, &QuadratureSpec::default(), &Direct).unwrap();
        let v: Vec<f64> = tab.samples().iter().map(|s| s.value).collect();
        assert_eq!(v.len(), 8);
        assert!(v.windows(2).all(|w| w[1] < w[0]), "{v:?}");
    }

    #[test]
    fn grid_requirements() {
        let k = kernel("classical", 1, KernelBand::Low);
        let spec = NormSpec {
            kind: NormKind::Lr,
            pair: PQPair::new(1.0, 2.0).unwrap(),
        };
        let q = QuadratureSpec::default();
        assert!(check_grid(&log_grid(10.0, 100.0, 8), 1.5).is_err());
        assert!(check_grid(&log_grid(10.0, 100.0, 8), 0.0).is_ok());
        assert!(sweep_norms(&k, spec, &log_grid(10.0, 1e3, 5), Transform::Hankel, &q, &Direct).is_err());
    }

    #[test]
    fn resolution_self_convergence() {
        let k = kernel("viscoelastic", 3, KernelBand::Low);
        let m = k.radial_multiplier(30.0).unwrap();
        let plan = plan_for_multiplier(&m, front_of(&m));
        let q = QuadratureSpec::default();
        let coarse = profile_on_plan(&m, 3, &plan, &q).unwrap();
        let fine = profile_on_plan(&m, 3, &plan.densified(2), &q).unwrap();
        for r in [1.0, f64::INFINITY] {
            let a = crate::norms::lr_norm(&coarse, r).unwrap().value;
            let b = crate::norms::lr_norm(&fine, r).unwrap().value;
            assert!((a / b - 1.0).abs() < 1e-3, "r={r} {a} {b}");
        }
    }
}
