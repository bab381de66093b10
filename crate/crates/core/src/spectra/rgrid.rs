//! Radius grids for kernel profiles.

use crate::error::{Error, Result};

pub fn uniform(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

pub fn geometric(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// Sorted union with near-duplicates (relative `1e−12`) removed.
pub fn merge(parts: &[Vec<f64>]) -> Vec<f64> {
    let mut v: Vec<f64> = parts.iter().flatten().cloned().filter(|x| x.is_finite() && *x >= 0.0).collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut out: Vec<f64> = Vec::with_capacity(v.len());
    for x in v {
        match out.last() {
            Some(&l) if x - l <= 1e-12 * x.abs().max(1e-300) => {}
            _ => out.push(x),
        }
    }
    out
}

/// Grid on `[0, r_max]` with half of its points inside the shell
/// `|r − center| ≤ 10·width`, where an oscillatory-diffusive kernel keeps its mass.
pub fn concentration(center: f64, width: f64, r_max: f64, n: usize) -> Result<Vec<f64>> {
    if !(width > 0.0) || !(r_max > 0.0) || n < 8 {
        return Err(Error::InvalidParams {
            name: "concentration grid".into(),
            reason: "need width > 0, r_max > 0 and at least 8 points".into(),
        });
    }
    let lo = (center - 10.0 * width).max(0.0);
    let hi = (center + 10.0 * width).min(r_max);
    let half = n / 2;
    let shell = if hi > lo { uniform(lo, hi, half) } else { Vec::new() };
    let rest = n - shell.len();
    // Remaining points: uniform in [0, lo] and [hi, r_max] in proportion to length.
    let (l1, l2) = (lo, (r_max - hi).max(0.0));
    let n1 = if l1 + l2 > 0.0 {
        ((rest as f64) * l1 / (l1 + l2)).round() as usize
    } else {
        0
    };
    let n2 = rest.saturating_sub(n1);
    let mut parts = vec![shell];
    if n1 >= 2 {
        parts.push(uniform(0.0, lo, n1));
    } else {
        parts.push(vec![0.0]);
    }
    if n2 >= 2 {
        parts.push(uniform(hi, r_max, n2));
    }
    Ok(merge(&parts))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn concentration_puts_half_in_shell() {
        let g = concentration(1.0, 0.001, 3.0, 400).unwrap();
        let inside = g.iter().filter(|r| (**r - 1.0).abs() <= 0.01 + 1e-12).count();
        assert!(inside >= 195, "{inside}");
        assert_eq!(g[0], 0.0);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert!((g.last().unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn merge_dedups() {
        let g = merge(&[vec![0.0, 1.0, 2.0], vec![1.0 + 1e-15, 0.5]]);
        assert_eq!(g, vec![0.0, 0.5, 1.0, 2.0]);
        let e = geometric(1.0, 100.0, 3);
        assert!((e[1] - 10.0).abs() < 1e-12);
    }
}
