//! Lattice inversion for non-radial multipliers.
//!
//! With `x_j = −L + jΔx`, `Δx = 2L/N` and `ξ_k = (k − N/2)π/L`, the sum
//! `(2π)^{−n} Σ_k m(ξ_k) e^{i x_j·ξ_k} (π/L)^n` factors per axis into a
//! sign flip `(−1)^k`, an unnormalized inverse DFT, and a sign `(−1)^{j+N/2}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::profile::{GridField, ProfileMeta};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dim: usize,
    pub extent: f64,
    pub points_per_axis: usize,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.dim > 4 {
            return Err(Error::Unsupported(format!("lattice inversion in dimension {}", self.dim)));
        }
        if !self.points_per_axis.is_power_of_two() || self.points_per_axis < 4 {
            return Err(Error::InvalidParams {
                name: "grid".into(),
                reason: "points_per_axis must be a power of two ≥ 4".into(),
            });
        }
        if !(self.extent > 0.0) {
            return Err(Error::InvalidParams {
                name: "grid".into(),
                reason: "extent must be positive".into(),
            });
        }
        Ok(())
    }

    pub fn dual_spacing(&self) -> f64 {
        PI / self.extent
    }
}

fn unravel(mut k: usize, n: usize, dim: usize, out: &mut [usize]) {
    for a in (0..dim).rev() {
        out[a] = k % n;
        k /= n;
    }
}

fn parity(idx: &[usize]) -> f64 {
    if idx.iter().sum::<usize>() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

pub fn fft_inverse(m: &(dyn Fn(&[f64]) -> f64 + Sync), spec: &GridSpec) -> Result<GridField> {
    spec.validate()?;
    let (n, dim) = (spec.points_per_axis, spec.dim);
    let total = n.pow(dim as u32);
    let dxi = spec.dual_spacing();
    let mut data = vec![Complex64::new(0.0, 0.0); total];
    let mut idx = vec![0usize; dim];
    let mut xi = vec![0.0; dim];
    let mut inside = 0.0;
    for (k, slot) in data.iter_mut().enumerate() {
        unravel(k, n, dim, &mut idx);
        for a in 0..dim {
            xi[a] = (idx[a] as f64 - (n / 2) as f64) * dxi;
        }
        let v = m(&xi);
        if !v.is_finite() {
            return Err(Error::Quadrature(format!("multiplier not finite at {xi:?}")));
        }
        inside += v.abs();
        *slot = Complex64::new(v * parity(&idx), 0.0);
    }
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_inverse(n);
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for axis in 0..dim {
        let stride = n.pow((dim - 1 - axis) as u32);
        let outer = total / (n * stride);
        for o in 0..outer {
            for i in 0..stride {
                let base = o * n * stride + i;
                for (k, c) in line.iter_mut().enumerate() {
                    *c = data[base + k * stride];
                }
                fft.process(&mut line);
                for (k, c) in line.iter().enumerate() {
                    data[base + k * stride] = *c;
                }
            }
        }
    }
    let scale = (dxi / (2.0 * PI)).powi(dim as i32);
    let half_sign = if (n / 2 * dim) % 2 == 0 { 1.0 } else { -1.0 };
    let values: Vec<f64> = data
        .iter()
        .enumerate()
        .map(|(k, c)| {
            unravel(k, n, dim, &mut idx);
            c.re * scale * parity(&idx) * half_sign
        })
        .collect();
    let outside = outside_mass(m, spec);
    let inside = inside * scale;
    let aliasing_bound = outside * scale;
    Ok(GridField {
        dim,
        extent: spec.extent,
        points_per_axis: n,
        values,
        aliasing_bound,
        flagged: aliasing_bound > 1e-3 * inside,
        meta: ProfileMeta::default(),
    })
}

/// `Σ|m|` over the doubled dual box minus the sampled one.
fn outside_mass(m: &(dyn Fn(&[f64]) -> f64 + Sync), spec: &GridSpec) -> f64 {
    let (n, dim) = (spec.points_per_axis, spec.dim);
    let dxi = spec.dual_spacing();
    let big = 2 * n;
    let total = big.pow(dim as u32);
    let mut idx = vec![0usize; dim];
    let mut xi = vec![0.0; dim];
    let mut s = 0.0;
    for k in 0..total {
        unravel(k, big, dim, &mut idx);
        let mut inner = true;
        for a in 0..dim {
            let c = idx[a] as isize - n as isize;
            inner &= c >= -((n / 2) as isize) && c < (n / 2) as isize;
            xi[a] = c as f64 * dxi;
        }
        if !inner {
            s += m(&xi).abs();
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_in_one_dimension() {
        let spec = GridSpec {
            dim: 1,
            extent: 20.0,
            points_per_axis: 256,
        };
        let g = fft_inverse(&|xi: &[f64]| (-xi[0] * xi[0]).exp(), &spec).unwrap();
        for j in [100usize, 128, 140] {
            let x = g.coordinate(j);
            let exact = (4.0 * PI).powf(-0.5) * (-x * x / 4.0).exp();
            assert!((g.values[j] - exact).abs() < 1e-12, "x={x}");
        }
        assert!(!g.flagged);
    }

    #[test]
    fn aliasing_is_flagged() {
        let spec = GridSpec {
            dim: 1,
            extent: 2.0,
            points_per_axis: 8,
        };
        let g = fft_inverse(&|xi: &[f64]| (-0.01 * xi[0] * xi[0]).exp(), &spec).unwrap();
        assert!(g.flagged);
    }

    #[test]
    fn rejects_bad_specs() {
        let spec = GridSpec {
            dim: 2,
            extent: 1.0,
            points_per_axis: 12,
        };
        assert!(fft_inverse(&|_: &[f64]| 1.0, &spec).is_err());
    }
}
