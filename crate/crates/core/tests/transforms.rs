//! Radial Hankel inversion against the lattice FFT on the same kernels.

use std::collections::BTreeMap;

use dampwave::oscillator::{KernelBand, SpectralKernel};
use dampwave::spectra::{fft_inverse, hankel_inverse, GridSpec, QuadratureSpec};
use dampwave::symbolkit::model_zoo;

fn compare(name: &str, band: KernelBand, t: f64, extent: f64, tol: f64) {
    let n = 2;
    let sym = model_zoo(name, &BTreeMap::new(), n).unwrap();
    let kernel = SpectralKernel::new(sym, band).unwrap();
    let spec = GridSpec { dim: n, extent, points_per_axis: 256 };
    let field = fft_inverse(&|xi: &[f64]| kernel.eval(t, xi), &spec).unwrap();
    let np = spec.points_per_axis;
    let h = field.spacing();
    // Points (x_j, 0) with 0 ≤ x_j < L/2, away from the periodic wrap.
    let js: Vec<usize> = (np / 2..np / 2 + np / 4).step_by(4).collect();
    let radii: Vec<f64> = js.iter().map(|&j| -extent + j as f64 * h).collect();
    let m = kernel.radial_multiplier(t).unwrap();
    let prof = hankel_inverse(&m, n, &radii, &QuadratureSpec::default()).unwrap();
    let peak = field.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let worst = js
        .iter()
        .zip(&prof.values)
        .map(|(&j, hv)| (field.values[j * np + np / 2] - hv).abs())
        .fold(0.0f64, f64::max);
    assert!(worst <= tol * peak, "{name} {band:?} t={t}: max deviation {worst:e} vs peak {peak:e}");
}

#[test]
fn classical_low_band() {
    // The band is supported in ρ ≤ 1/4; a wide cell keeps its slow tails from wrapping.
    compare("classical", KernelBand::Low, 4.0, 512.0, 1e-6);
}

#[test]
fn viscoelastic_low_band() {
    compare("viscoelastic", KernelBand::Low, 2.0, 128.0, 1e-6);
}

#[test]
fn viscoelastic_mid_band() {
    compare("viscoelastic", KernelBand::Mid, 1.0, 48.0, 1e-5);
}
