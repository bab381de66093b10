//! Numerical realization of the fundamental solution of
//! `u_tt - Δu + A u_t = 0` for Fourier-multiplier dissipations `a(ξ)`,
//! with decay/singularity rate checks for its L^p–L^q norms.

pub mod error;
pub mod expcli;
pub mod norms;
pub mod oscillator;
pub mod rates;
pub mod spectra;
pub mod symbolkit;

pub use error::{Error, Result};
