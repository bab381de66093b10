//! Invariants checked on random inputs.

use std::sync::OnceLock;

use proptest::prelude::*;

use dampwave::norms::{
    d_exponent, lr_norm, op_norm_lower_test, op_norm_upper_young, PQPair, TestProfile,
};
use dampwave::oscillator::{khat_mode, ode_trajectory, Localizer, EPS_DEG};
use dampwave::rates::{plan_for_multiplier, profile_on_plan};
use dampwave::spectra::{bessel_j, hankel_point, QuadratureSpec, RadialMultiplier, RadialProfile};

const INF: f64 = f64::INFINITY;

fn wobbly() -> RadialMultiplier {
    RadialMultiplier::from_fn(|r| (-r * r).exp() * (3.0 * r).cos())
}

fn wobbly_profile() -> &'static RadialProfile {
    static P: OnceLock<RadialProfile> = OnceLock::new();
    P.get_or_init(|| {
        let m = wobbly();
        profile_on_plan(&m, 3, &plan_for_multiplier(&m, None), &QuadratureSpec::default()).unwrap()
    })
}

fn gaussian_profile() -> &'static (RadialMultiplier, RadialProfile) {
    static P: OnceLock<(RadialMultiplier, RadialProfile)> = OnceLock::new();
    P.get_or_init(|| {
        let m = RadialMultiplier::from_fn(|r| (-r * r).exp());
        let prof = profile_on_plan(&m, 3, &plan_for_multiplier(&m, None), &QuadratureSpec::default()).unwrap();
        (m, prof)
    })
}

fn neighbours(x: f64) -> (f64, f64) {
    (f64::from_bits(x.to_bits() - 1), f64::from_bits(x.to_bits() + 1))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn partition_of_unity(delta in 0.01f64..1.0, ratio in 4.0f64..64.0, log_rho in -3.0f64..3.0) {
        let loc = Localizer::new(delta, delta * ratio).unwrap();
        let rho = 10f64.powf(log_rho);
        let (a, b, c) = (loc.phi0(rho), loc.mid(rho), loc.phi1(rho));
        prop_assert!((a + b + c - 1.0).abs() <= 1e-15);
        for w in [a, b, c] {
            prop_assert!((-1e-15..=1.0 + 1e-15).contains(&w));
        }
    }

    #[test]
    fn kernel_symbol_bounded_by_t(a in 0.0f64..50.0, w in 0.0f64..50.0, t in 0.0f64..50.0) {
        prop_assert!(khat_mode(a, w, t).abs() <= t * (1.0 + 1e-12));
    }

    #[test]
    fn continuous_across_branches(w in 0.01f64..20.0, t in 0.0f64..20.0) {
        for edge in [2.0 * w * (1.0 - EPS_DEG), 2.0 * w, 2.0 * w * (1.0 + EPS_DEG)] {
            let (lo, hi) = neighbours(edge);
            prop_assert!((khat_mode(hi, w, t) - khat_mode(lo, w, t)).abs() <= 1e-9);
        }
    }

    #[test]
    fn bessel_recurrence(twice_nu in 1u32..14, z in 0.05f64..120.0) {
        let nu = twice_nu as f64 / 2.0;
        let lhs = bessel_j(nu - 1.0, z).unwrap() + bessel_j(nu + 1.0, z).unwrap();
        let rhs = 2.0 * nu / z * bessel_j(nu, z).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()), "nu={nu} z={z}: {lhs} vs {rhs}");
    }

    #[test]
    fn d_is_dual_invariant(ip in 0.0f64..=1.0, gap in 0.0f64..=1.0, n in 1usize..6) {
        let iq = ip - gap * ip;
        let (p, q) = (1.0 / ip, if iq == 0.0 { INF } else { 1.0 / iq });
        prop_assume!(p >= 1.0 && q >= p);
        let dual = PQPair::new(p, q).unwrap().dual();
        prop_assert!((d_exponent(p, q, n) - d_exponent(dual.p, dual.q, n)).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn energy_nonincreasing(a in 0.0f64..6.0, w in 0.0f64..6.0) {
        let traj = ode_trajectory(a, w, 8.0, 2000).unwrap();
        let e: Vec<f64> = traj.iter().map(|&(_, y, v)| v * v + w * w * y * y).collect();
        for p in e.windows(2) {
            prop_assert!(p[1] <= p[0] * (1.0 + 1e-12) + 1e-15);
        }
    }

    #[test]
    fn lr_norms_log_convex_in_inverse_exponent(s0 in 0.0f64..1.0, s2 in 0.0f64..1.0, lam in 0.05f64..0.95) {
        prop_assume!((s2 - s0).abs() > 0.05);
        let prof = wobbly_profile();
        let s1 = (1.0 - lam) * s0 + lam * s2;
        let ln = |s: f64| {
            let r = if s == 0.0 { INF } else { 1.0 / s };
            let rep = lr_norm(prof, r).unwrap();
            (rep.value.ln(), rep.quad_error / rep.value)
        };
        let ((l0, e0), (l1, e1), (l2, e2)) = (ln(s0), ln(s1), ln(s2));
        prop_assert!(l1 <= (1.0 - lam) * l0 + lam * l2 + 1e-9 + 2.0 * (e0 + e1 + e2));
    }

    #[test]
    fn hankel_is_deterministic(log_r in -2.0f64..1.5) {
        let m = wobbly();
        let r = 10f64.powf(log_r);
        let q = QuadratureSpec::default();
        let a = hankel_point(&m, 3, r, &q).unwrap().value;
        let b = hankel_point(&m, 3, r, &q).unwrap().value;
        prop_assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn lower_test_below_young(ip in 0.34f64..=1.0, gap in 0.0f64..=1.0, log_tau in -0.5f64..0.5) {
        let iq = ip - gap * (ip - 1.0 / 3.0).max(0.0);
        let pair = PQPair::new(1.0 / ip, 1.0 / iq).unwrap();
        let (m, prof) = gaussian_profile();
        let upper = op_norm_upper_young(prof, pair, None).unwrap();
        let radii: Vec<f64> = (0..600).map(|i| i as f64 * 0.04).collect();
        let lower = op_norm_lower_test(
            m,
            3,
            pair,
            10f64.powf(log_tau),
            &TestProfile::default_for(3),
            &radii,
            &QuadratureSpec::default(),
        )
        .unwrap();
        prop_assert!(lower.value - lower.quad_error <= upper.value + upper.quad_error,
            "{:?}: lower {} > upper {}", pair, lower.value, upper.value);
    }
}
