//! Bessel functions of the first kind for the orders `ν = n/2 − 1` that
//! appear in radial Fourier inversion.
//!
//! Half-integer orders use closed trigonometric forms (spherical Bessel
//! recurrences), integer orders use the ascending series for `z ≤ 12`,
//! Miller's backward recurrence for `12 < z < 30` and the Hankel asymptotic
//! expansion beyond.

use std::f64::consts::PI;

use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

/// Argument above which the Hankel expansion is used for integer orders
/// and for the oscillatory split in radial quadrature.
pub const ASYMPTOTIC_Z: f64 = 30.0;

fn order_kind(nu: f64) -> Result<OrderKind> {
    let twice = 2.0 * nu;
    if nu < -0.5 || (twice - twice.round()).abs() > 1e-12 || nu > 60.0 {
        return Err(Error::Unsupported(format!("Bessel order {nu}")));
    }
    let k = twice.round() as i64;
    Ok(if k % 2 == 0 {
        OrderKind::Integer((k / 2) as usize)
    } else {
        OrderKind::HalfInteger(((k - 1) / 2) as i64)
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum OrderKind {
    Integer(usize),
    /// `ν = l + 1/2` with `l ≥ −1`.
    HalfInteger(i64),
}

/// `J_ν(z)` for `ν ∈ {−1/2, 0, 1/2, 1, …}` and `z ≥ 0`.
pub fn bessel_j(nu: f64, z: f64) -> Result<f64> {
    if !(z >= 0.0) || !z.is_finite() {
        return Err(Error::Unsupported(format!("Bessel argument {z}")));
    }
    Ok(match order_kind(nu)? {
        OrderKind::HalfInteger(l) => half_integer(l, z),
        OrderKind::Integer(m) => integer(m, z),
    })
}

/// Ascending series `Σ (−1)^k (z/2)^{2k+ν} / (k! Γ(k+ν+1))`.
pub fn series(nu: f64, z: f64) -> f64 {
    if z == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    (0.5 * z).powf(nu) * normalized_series(nu, z)
}

/// `Σ (−1)^k (z/2)^{2k} / (k! Γ(k+ν+1))`, i.e. `(z/2)^{−ν} J_ν(z)`.
fn normalized_series(nu: f64, z: f64) -> f64 {
    let q = -0.25 * z * z;
    let mut term = 1.0 / gamma(nu + 1.0);
    let mut sum = term;
    for k in 1..200 {
        term *= q / (k as f64 * (k as f64 + nu));
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

fn half_integer(l: i64, z: f64) -> f64 {
    if l == -1 {
        return if z == 0.0 { f64::INFINITY } else { (2.0 / (PI * z)).sqrt() * z.cos() };
    }
    let nu = l as f64 + 0.5;
    if z < (l as f64).max(1.0) + 1.0 {
        return series(nu, z);
    }
    // j_l by upward recurrence, stable for z > l.
    let (s, c) = z.sin_cos();
    let mut jm = s / z;
    if l == 0 {
        return (2.0 * z / PI).sqrt() * jm;
    }
    let mut j = s / (z * z) - c / z;
    for k in 1..l {
        let next = (2 * k + 1) as f64 / z * j - jm;
        jm = j;
        j = next;
    }
    (2.0 * z / PI).sqrt() * j
}

fn integer(m: usize, z: f64) -> f64 {
    let nu = m as f64;
    if z <= 12.0 {
        return series(nu, z);
    }
    if z < ASYMPTOTIC_Z || nu > 0.5 * z {
        return miller(m, z);
    }
    let j0 = hankel_value(0.0, z);
    if m == 0 {
        return j0;
    }
    let mut jm = j0;
    let mut j = hankel_value(1.0, z);
    for k in 1..m {
        let next = 2.0 * k as f64 / z * j - jm;
        jm = j;
        j = next;
    }
    j
}

/// Backward recurrence normalized by `J₀ + 2ΣJ_{2k} = 1`.
fn miller(m: usize, z: f64) -> f64 {
    let start = {
        let s = (m.max(z as usize) + 20 + (40.0 * z).sqrt() as usize) | 1;
        s + 1
    };
    let mut jp = 0.0;
    let mut j = 1e-30;
    let mut sum = 0.0;
    let mut result = 0.0;
    for k in (1..=start).rev() {
        let jm = 2.0 * k as f64 / z * j - jp;
        jp = j;
        j = jm;
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp *= 1e-250;
            result *= 1e-250;
            sum *= 1e-250;
        }
        let idx = k - 1;
        if idx % 2 == 0 && idx > 0 {
            sum += 2.0 * j;
        }
        if idx == m {
            result = j;
        }
    }
    sum += j;
    result / sum
}

/// Hankel amplitudes `(P, Q)` with `J_ν(z) = √(2/(πz)) (P cos χ − Q sin χ)`,
/// `χ = z − νπ/2 − π/4`. Finite sums for half-integer orders.
pub fn hankel_pq(nu: f64, z: f64) -> (f64, f64) {
    let mu = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut prev_abs = f64::INFINITY;
    for k in 1..60 {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (k as f64 * 8.0 * z);
        if term == 0.0 {
            break;
        }
        let a = term.abs();
        if a > prev_abs {
            break;
        }
        prev_abs = a;
        // Terms alternate between Q (odd k) and P (even k) with signs (−1)^{⌊k/2⌋}.
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 1 {
            q += sign * term;
        } else {
            p += sign * term;
        }
        if a < 1e-17 {
            break;
        }
    }
    (p, q)
}

fn hankel_value(nu: f64, z: f64) -> f64 {
    let (p, q) = hankel_pq(nu, z);
    let chi = z - 0.5 * nu * PI - 0.25 * PI;
    (2.0 / (PI * z)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// `Λ_ν(z) = z^{−ν} J_ν(z)`, entire in `z`; `Λ_ν(0) = 1/(2^ν Γ(ν+1))`.
pub fn lambda(nu: f64, z: f64) -> f64 {
    if nu == -0.5 {
        return (2.0 / PI).sqrt() * z.cos();
    }
    if z < 2.0 {
        return 2f64.powf(-nu) * normalized_series(nu, z);
    }
    bessel_j(nu, z).expect("supported order") * z.powf(-nu)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        for &z in &[0.1, 1.0, 5.0, 17.0, 80.0] {
            let c = (2.0 / (PI * z)).sqrt();
            assert!((bessel_j(-0.5, z).unwrap() - c * z.cos()).abs() < 1e-14);
            assert!((bessel_j(0.5, z).unwrap() - c * z.sin()).abs() < 1e-14);
        }
    }

    #[test]
    fn first_zero_of_j0() {
        // Bisection on the ascending series gives the zero independently.
        let (mut lo, mut hi) = (2.3, 2.5);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if series(0.0, lo) * series(0.0, mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        assert!((lo - 2.404825557695773).abs() < 1e-12);
        assert!(bessel_j(0.0, 2.404825557695773).unwrap().abs() < 1e-14);
    }

    #[test]
    fn regimes_agree_at_switches() {
        for m in 0..3 {
            for &z in &[11.999, 12.001, 30.001, 30.5] {
                let a = miller(m, z);
                let b = if z > 30.0 { integer(m, z) } else { series(m as f64, z) };
                assert!((a - b).abs() < 1e-11, "m={m} z={z} {a} {b}");
            }
        }
    }

    #[test]
    fn hankel_matches_miller() {
        for m in 0..3 {
            for &z in &[30.0, 45.0, 100.0, 1000.0] {
                let nu = m as f64;
                let mut jm = hankel_value(0.0, z);
                let mut j = hankel_value(1.0, z);
                let val = if m == 0 {
                    jm
                } else {
                    for k in 1..m {
                        let next = 2.0 * k as f64 / z * j - jm;
                        jm = j;
                        j = next;
                    }
                    j
                };
                let reference = miller(m, z);
                let scale = (2.0 / (PI * z)).sqrt();
                assert!((val - reference).abs() < 1e-12 * scale, "nu={nu} z={z}");
            }
        }
    }

    #[test]
    fn half_integer_pq_is_exact() {
        for &z in &[3.0, 10.0, 50.0] {
            let (p, q) = hankel_pq(1.5, z);
            let chi = z - 0.75 * PI - 0.25 * PI;
            let v = (2.0 / (PI * z)).sqrt() * (p * chi.cos() - q * chi.sin());
            let exact = (2.0 / (PI * z)).sqrt() * (z.sin() / z - z.cos());
            assert!((v - exact).abs() < 1e-14);
        }
    }

    #[test]
    fn lambda_at_zero() {
        for &nu in &[-0.5, 0.0, 0.5, 1.0, 1.5] {
            let expect = 1.0 / (2f64.powf(nu) * gamma(nu + 1.0));
            assert!((lambda(nu, 0.0) - expect).abs() < 1e-14);
            let z = 1.999;
            assert!((lambda(nu, z) - bessel_j(nu, z).unwrap() * z.powf(-nu)).abs() < 1e-12);
        }
    }

    #[test]
    fn unsupported_orders() {
        assert!(bessel_j(0.3, 1.0).is_err());
        assert!(bessel_j(-1.0, 1.0).is_err());
    }
}
