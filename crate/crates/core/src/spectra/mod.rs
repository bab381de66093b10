//! Inverse Fourier transforms of multipliers: radial Hankel–Bessel
//! quadrature, lattice FFT, and the tail constant of `F⁻¹(e^{−|ξ|^θ})`.

pub mod asymp;
pub mod bessel;
pub mod fft;
pub mod hankel;
pub mod multiplier;
pub mod profile;
pub mod quad;
pub mod rgrid;

pub use bessel::bessel_j;
pub use hankel::{hankel_inverse, hankel_point, HankelPoint, QuadratureSpec};
pub use multiplier::{RadialMultiplier, RealFn, SmoothPart, Wave};
pub use profile::{GridField, ProfileMeta, RadialProfile, NORMALIZATION};
pub use asymp::{asymp_constant, AsympEstimate};
pub use fft::{fft_inverse, GridSpec};
