use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{sphere_directions, DissipationSymbol};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Band {
    Low,
    High,
}

#[derive(Clone, Debug)]
pub struct MhOptions {
    /// Allowed growth of a per-order constant across the three extreme shells.
    pub stability_factor: f64,
    /// Constants below this fraction of the order-0 constant count as zero.
    pub zero_floor: f64,
    /// Maximum number of step halvings when two step sizes disagree.
    pub max_halvings: u32,
}

impl Default for MhOptions {
    fn default() -> Self {
        Self {
            stability_factor: 10.0,
            zero_floor: 1e-6,
            max_halvings: 40,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MhReport {
    pub band: Band,
    pub max_order: usize,
    /// `per_order_constants[k]` is the sup over all shells for order `k`.
    pub per_order_constants: Vec<f64>,
    /// `shell_constants[k][s]`, shells ordered from the band edge outward.
    pub shell_constants: Vec<Vec<f64>>,
    pub lower_constant: f64,
    pub passed: bool,
    pub shells: Vec<f64>,
    /// Orders whose constants grow across the extreme shells.
    pub failed_orders: Vec<usize>,
}

pub fn mh_check(sym: &DissipationSymbol, band: Band, shells: usize, samples_per_shell: usize) -> Result<MhReport> {
    mh_check_with(sym, band, shells, samples_per_shell, &MhOptions::default())
}

/// Relative finite-difference step for derivatives of order `k`.
fn base_step(k: usize) -> f64 {
    const STEPS: [f64; 8] = [1e-4, 1e-4, 1e-3, 5e-3, 1.5e-2, 3e-2, 5e-2, 7e-2];
    STEPS[k.min(7)]
}

fn multi_indices(n: usize, order: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n - 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for g in (0..=left).rev() {
            cur.push(g);
            rec(n, left - g, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, order, &mut Vec::new(), &mut out);
    out
}

fn binom(k: usize, i: usize) -> f64 {
    let mut c = 1.0;
    for j in 0..i {
        c = c * (k - j) as f64 / (j + 1) as f64;
    }
    c
}

/// Nested central difference `∂^γ a(ξ)` with absolute step `h`.
fn nested_difference(sym: &DissipationSymbol, xi: &[f64], gamma: &[usize], h: f64) -> f64 {
    let n = xi.len();
    let counts: Vec<usize> = gamma.iter().map(|g| g + 1).collect();
    let total: usize = counts.iter().product();
    let order: usize = gamma.iter().sum();
    let mut acc = 0.0;
    let mut pt = vec![0.0; n];
    let mut idx = vec![0usize; n];
    for _ in 0..total {
        let mut w = 1.0;
        for j in 0..n {
            let k = gamma[j];
            let i = idx[j];
            w *= binom(k, i) * if i % 2 == 0 { 1.0 } else { -1.0 };
            pt[j] = xi[j] + (0.5 * k as f64 - i as f64) * h;
        }
        acc += w * sym.evaluate(&pt);
        for j in 0..n {
            idx[j] += 1;
            if idx[j] < counts[j] {
                break;
            }
            idx[j] = 0;
        }
    }
    acc / h.powi(order as i32)
}

/// Derivative estimate with step halving until two consecutive steps agree.
fn derivative(sym: &DissipationSymbol, xi: &[f64], gamma: &[usize], rho: f64, scale: f64, opts: &MhOptions) -> f64 {
    let order: usize = gamma.iter().sum();
    if order == 0 {
        return sym.evaluate(xi);
    }
    let mut h = base_step(order) * rho;
    let mut prev = nested_difference(sym, xi, gamma, h);
    let floor = 1e-7 * scale * rho.powi(-(order as i32));
    for _ in 0..opts.max_halvings {
        h *= 0.5;
        let next = nested_difference(sym, xi, gamma, h);
        if (next - prev).abs() <= 0.1 * next.abs().max(prev.abs()) + floor {
            return prev;
        }
        prev = next;
    }
    prev
}

pub fn mh_check_with(
    sym: &DissipationSymbol,
    band: Band,
    shells: usize,
    samples_per_shell: usize,
    opts: &MhOptions,
) -> Result<MhReport> {
    if shells < 4 {
        return Err(Error::InvalidParams {
            name: "mh_check".into(),
            reason: "need at least 4 shells".into(),
        });
    }
    let n = sym.dim;
    let theta = match band {
        Band::Low => sym.theta0,
        Band::High => sym.theta1,
    };
    let max_order = n + 1;
    let indices: Vec<Vec<Vec<usize>>> = (0..=max_order).map(|k| multi_indices(n, k)).collect();
    let samples = samples_per_shell.max(1);
    let dirs = sphere_directions(n, samples);
    // Same relative pattern on every shell so homogeneous symbols give equal constants.
    let pattern: Vec<(f64, &Vec<f64>)> = (0..samples)
        .map(|i| {
            let u = ((i as f64) * 0.618_033_988_749_894_9 + 0.25).fract();
            (u, &dirs[i % dirs.len()])
        })
        .collect();
    let shell_radius = |s: usize| match band {
        Band::Low => sym.delta * 2f64.powi(-(s as i32)),
        Band::High => sym.big_m * 2f64.powi(s as i32),
    };
    let shell_list: Vec<f64> = (0..shells).map(shell_radius).collect();

    let per_shell: Vec<Result<(Vec<f64>, f64)>> = shell_list
        .par_iter()
        .map(|&r0| {
            let mut consts = vec![0.0f64; max_order + 1];
            let mut lower = f64::INFINITY;
            let mut xi = vec![0.0; n];
            for (u, d) in &pattern {
                // Low shells extend inward (r0/2, r0], high shells outward [r0, 2r0).
                let rho = match band {
                    Band::Low => r0 * 2f64.powf(-u),
                    Band::High => r0 * 2f64.powf(*u),
                };
                for (x, e) in xi.iter_mut().zip(d.iter()) {
                    *x = rho * e;
                }
                let a = sym.evaluate(&xi);
                if !(a > 0.0) || !a.is_finite() {
                    return Err(Error::NotDissipative {
                        at: format!("{xi:?}"),
                        value: a,
                    });
                }
                let weight0 = rho.powf(-theta);
                lower = lower.min(a * weight0);
                for (k, set) in indices.iter().enumerate() {
                    let w = rho.powf(k as f64 - theta);
                    for gamma in set {
                        let d = derivative(sym, &xi, gamma, rho, a, opts);
                        consts[k] = consts[k].max(d.abs() * w);
                    }
                }
            }
            Ok((consts, lower))
        })
        .collect();

    let mut shell_constants = vec![Vec::with_capacity(shells); max_order + 1];
    let mut lower_constant = f64::INFINITY;
    for res in per_shell {
        let (consts, lower) = res?;
        lower_constant = lower_constant.min(lower);
        for (k, c) in consts.into_iter().enumerate() {
            shell_constants[k].push(c);
        }
    }
    let per_order_constants: Vec<f64> = shell_constants
        .iter()
        .map(|v| v.iter().cloned().fold(0.0, f64::max))
        .collect();
    let c0 = per_order_constants[0].max(f64::MIN_POSITIVE);
    let floor = opts.zero_floor * c0;
    let mut failed_orders = Vec::new();
    for (k, v) in shell_constants.iter().enumerate() {
        let finite = v.iter().all(|c| c.is_finite());
        let m = v.len();
        let reference = v[m - 3].max(floor);
        let grows = v[m - 2] > opts.stability_factor * reference || v[m - 1] > opts.stability_factor * reference;
        if !finite || grows {
            failed_orders.push(k);
        }
    }
    let passed = lower_constant > 0.0 && lower_constant.is_finite() && failed_orders.is_empty();
    Ok(MhReport {
        band,
        max_order,
        per_order_constants,
        shell_constants,
        lower_constant,
        passed,
        shells: shell_list,
        failed_orders,
    })
}
