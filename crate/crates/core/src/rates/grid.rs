//! Radial sample grids that follow where a kernel keeps its mass.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectra::{hankel_inverse, rgrid, QuadratureSpec, RadialMultiplier, RadialProfile};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridPart {
    Uniform { lo: f64, hi: f64, n: usize },
    Geometric { lo: f64, hi: f64, n: usize },
}

/// Initial radii plus a deterministic refinement rule; the plan, not the
/// final grid, is what a cache key records.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPlan {
    pub parts: Vec<GridPart>,
    /// Bisection rounds on cells whose value jump exceeds `refine_tol·max|K|`.
    pub refine_rounds: usize,
    pub refine_tol: f64,
    /// Doublings of the outer radius while the weighted envelope
    /// `r^{n−1}|K|` on the last fifth exceeds `extend_tol` of its maximum.
    pub extend_rounds: usize,
    pub extend_tol: f64,
    /// Radius spacing of the extensions.
    pub extend_step: f64,
    pub max_points: usize,
}

impl GridPlan {
    pub fn initial(&self) -> Vec<f64> {
        let parts: Vec<Vec<f64>> = self
            .parts
            .iter()
            .map(|p| match *p {
                GridPart::Uniform { lo, hi, n } => rgrid::uniform(lo, hi, n),
                GridPart::Geometric { lo, hi, n } => rgrid::geometric(lo, hi, n),
            })
            .collect();
        rgrid::merge(&parts)
    }

    /// Every part scaled by `factor` in point count, for self-convergence checks.
    pub fn densified(&self, factor: usize) -> Self {
        let parts = self
            .parts
            .iter()
            .map(|p| match *p {
                GridPart::Uniform { lo, hi, n } => GridPart::Uniform { lo, hi, n: (n - 1) * factor + 1 },
                GridPart::Geometric { lo, hi, n } => GridPart::Geometric { lo, hi, n: (n - 1) * factor + 1 },
            })
            .collect();
        Self {
            parts,
            extend_step: self.extend_step / factor as f64,
            max_points: self.max_points * factor,
            ..self.clone()
        }
    }
}

/// Frequency above which `ρ·envelope(ρ)` stays below `10⁻³` of its peak.
pub fn bandwidth(m: &RadialMultiplier) -> f64 {
    let (lo, hi) = m.support();
    let lo = lo.max(1e-9);
    let hi = hi.min(1e13);
    let probe: Vec<f64> = rgrid::geometric(lo, hi, 2000);
    let vals: Vec<f64> = probe.iter().map(|&r| r * m.envelope(r)).collect();
    let peak = vals.iter().cloned().fold(0.0, f64::max);
    if peak == 0.0 {
        return hi;
    }
    let i = vals.iter().rposition(|&v| v >= 1e-3 * peak).unwrap_or(0);
    probe[(i + 1).min(probe.len() - 1)]
}

/// Plan for `F⁻¹m`: a core around the origin and, when `m` carries waves,
/// a dense shell around the front `|x| = front`, both at the resolution
/// the bandwidth of `m` demands, over a uniform background.
pub fn plan_for_multiplier(m: &RadialMultiplier, front: Option<f64>) -> GridPlan {
    let bw = bandwidth(m);
    let w = 1.0 / bw;
    let reach = 40.0 * w;
    let mut parts = vec![GridPart::Uniform { lo: 0.0, hi: reach, n: 121 }];
    let outer = match front {
        Some(f) if f > 0.0 => {
            parts.push(GridPart::Uniform {
                lo: (f - reach).max(0.0),
                hi: f + reach,
                n: 241,
            });
            f + reach
        }
        _ => reach,
    };
    parts.push(GridPart::Uniform { lo: 0.0, hi: outer * 1.5, n: 301 });
    GridPlan {
        parts,
        refine_rounds: 6,
        refine_tol: 0.02,
        extend_rounds: 4,
        extend_tol: 1e-4,
        // A quarter of the shortest half-period.
        extend_step: 0.25 * std::f64::consts::PI / bw,
        max_points: 6000,
    }
}

/// Inverts `m` on the plan, bisecting cells with large value jumps.
pub fn profile_on_plan(m: &RadialMultiplier, dim: usize, plan: &GridPlan, quad: &QuadratureSpec) -> Result<RadialProfile> {
    let grid = plan.initial();
    if grid.len() < 3 {
        return Err(Error::InvalidParams {
            name: "grid plan".into(),
            reason: "fewer than three radii".into(),
        });
    }
    let mut prof = hankel_inverse(m, dim, &grid, quad)?;
    for _ in 0..plan.extend_rounds {
        let y: Vec<f64> = prof
            .r_grid
            .iter()
            .zip(&prof.values)
            .map(|(&r, v)| v.abs() * r.powi(dim as i32 - 1))
            .collect();
        let peak = y.iter().cloned().fold(0.0, f64::max);
        let xn = *prof.r_grid.last().unwrap();
        let tail = prof
            .r_grid
            .iter()
            .zip(&y)
            .filter(|(&r, _)| r >= 0.8 * xn)
            .fold(0.0f64, |a, (_, &v)| a.max(v));
        let room = plan.max_points.saturating_sub(prof.r_grid.len());
        let n = ((xn / plan.extend_step).ceil() as usize).max(2);
        if !(tail > plan.extend_tol * peak) || n > room || !(plan.extend_step > 0.0) {
            break;
        }
        let ext: Vec<f64> = (1..=n).map(|i| xn + xn * i as f64 / n as f64).collect();
        let extra = hankel_inverse(m, dim, &ext, quad)?;
        prof = merge_profiles(&prof, &extra);
    }
    for _ in 0..plan.refine_rounds {
        let scale = prof.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if scale == 0.0 {
            break;
        }
        let room = plan.max_points.saturating_sub(prof.r_grid.len());
        let mut mids: Vec<f64> = prof
            .r_grid
            .windows(2)
            .zip(prof.values.windows(2))
            .filter(|(_, v)| (v[1] - v[0]).abs() > plan.refine_tol * scale)
            .map(|(r, _)| 0.5 * (r[0] + r[1]))
            .filter(|&x| x > 0.0)
            .collect();
        mids.truncate(room);
        if mids.is_empty() {
            break;
        }
        let extra = hankel_inverse(m, dim, &mids, quad)?;
        prof = merge_profiles(&prof, &extra);
    }
    Ok(prof)
}

fn merge_profiles(a: &RadialProfile, b: &RadialProfile) -> RadialProfile {
    let mut rows: Vec<(f64, f64, f64, bool)> = Vec::with_capacity(a.r_grid.len() + b.r_grid.len());
    for p in [a, b] {
        for i in 0..p.r_grid.len() {
            rows.push((p.r_grid[i], p.values[i], p.quad_error[i], p.flagged.contains(&i)));
        }
    }
    rows.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    rows.dedup_by(|x, y| x.0 == y.0);
    let mut out = a.clone();
    out.r_grid = rows.iter().map(|r| r.0).collect();
    out.values = rows.iter().map(|r| r.1).collect();
    out.quad_error = rows.iter().map(|r| r.2).collect();
    out.flagged = rows.iter().enumerate().filter(|(_, r)| r.3).map(|(i, _)| i).collect();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    #[test]
    fn bandwidth_of_gaussian() {
        let t = 4.0;
        let m = RadialMultiplier::from_fn(move |r| (-t * r * r).exp());
        let b = bandwidth(&m);
        // ρe^{−tρ²} falls to 10⁻³ of its peak near ρ ≈ 1.56.
        assert!(b > 1.4 && b < 1.8, "{b}");
    }

    #[test]
    fn refinement_resolves_front() {
        let tau = 1e-3;
        let m = RadialMultiplier::sinc_times(1.0, Arc::new(move |r| (-(tau * r).powi(2)).exp()));
        let plan = plan_for_multiplier(&m, Some(1.0));
        let prof = profile_on_plan(&m, 3, &plan, &QuadratureSpec::default()).unwrap();
        let near = prof.r_grid.iter().filter(|&&r| (r - 1.0).abs() < 10.0 * tau).count();
        assert!(near > 50, "{near}");
        assert!(prof.r_grid.windows(2).all(|w| w[1] > w[0]));
    }
}
