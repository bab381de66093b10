//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines reach the console.
//! Criteria listed in `KNOWN_RED` are reported as FAIL like any other and
//! do not flip the exit status; any other FAIL does.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dampwave::norms::{d_exponent, lr_norm, op_norm_exact_p1, sphere_area, NormKind, PQPair};
use dampwave::oscillator::{khat_mode, EPS_DEG, ode_oracle, ode_trajectory, KernelBand, Localizer, SpectralKernel};
use dampwave::rates::{
    crucial_experiment, k12_exponential_check, lemma_exp_check, log_grid, multiplier_l2,
    plan_for_multiplier, profile_on_plan, sweep_norms, taylor_sharpness, theorem_check, Direct, Experiment,
    FitWindow, NormSpec, Tolerances, Transform,
};
use dampwave::spectra::{bessel_j, hankel_inverse, QuadratureSpec, RadialMultiplier};
use dampwave::symbolkit::{model_zoo, DissipationSymbol};

/// Criteria expected to fail, with the reason printed next to the line.
const KNOWN_RED: &[(u32, &str)] = &[(
    3,
    "the exact integral of sinc²·e^{−2τ²ρ²} over ℝ² grows like π(−log τ); the stated 2π is not reachable",
)];

const INF: f64 = f64::INFINITY;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn zoo(name: &str, n: usize) -> DissipationSymbol {
    model_zoo(name, &BTreeMap::new(), n).unwrap()
}

fn zoo_with(name: &str, key: &str, v: f64, n: usize) -> DissipationSymbol {
    model_zoo(name, &BTreeMap::from([(key.to_string(), v)]), n).unwrap()
}

fn pair(p: f64, q: f64) -> PQPair {
    PQPair::new(p, q).unwrap()
}

fn slopes(e: &Experiment) -> String {
    e.verdicts
        .iter()
        .map(|v| {
            format!(
                "{} ({},{}) slope {:.4} vs {}",
                v.case,
                dampwave::norms::fmt_exp(v.p),
                dampwave::norms::fmt_exp(v.q),
                v.fitted,
                v.predicted.map(|p| format!("{p:.4}")).unwrap_or_else(|| "-".into())
            )
        })
        .collect::<Vec<_>>()
        .join("; ")
}

/// Theorem check on the asymptotic window, with the full-window slope kept
/// in the detail line for comparison.
fn asymptotic_check(k: &SpectralKernel, pq: PQPair, grid: &[f64], tol: &Tolerances) -> (Experiment, String) {
    let quad = QuadratureSpec::default();
    let pred = match dampwave::rates::claim_for(&k.sym, k.band, pq) {
        dampwave::rates::Claim::Predicted(p) => p,
        dampwave::rates::Claim::NoClaim(why) => panic!("no claim: {why}"),
    };
    let window = FitWindow::asymptotic(pred.regime_end);
    let e = theorem_check(k, pq, grid, Transform::Hankel, &quad, &Direct, tol, &window).unwrap();
    let full = dampwave::rates::fit_power(&e.sweeps[0].samples(), &FitWindow::default()).unwrap();
    let w = e.fits[0].window;
    let note = format!(
        "{} on [{:.3e}, {:.3e}] (full-window slope {:.4})",
        slopes(&e),
        w[0],
        w[1],
        full.slope
    );
    (e, note)
}

fn rk4_steps(a: f64, w: f64, t: f64) -> usize {
    (((a + w) * t / 0.005).ceil() as usize).max(1000)
}

fn crit1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for i in 0..1100 {
        let (a, w, t) = if i < 1000 {
            (rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0))
        } else {
            let w: f64 = rng.gen_range(0.05..5.0);
            let eta: f64 = rng.gen_range(-1e-5..1e-5);
            (2.0 * w * (1.0 + eta), w, rng.gen_range(0.0..10.0))
        };
        let (y, _) = ode_oracle(a, w, t, rk4_steps(a, w, t)).unwrap();
        worst = worst.max((khat_mode(a, w, t) - y).abs());
    }
    outcome(worst <= 1e-6, format!("max |K̂ − RK4| = {worst:.2e} over 1100 draws"))
}

fn crit2() -> Outcome {
    let quad = QuadratureSpec::default();
    let mut worst_point = 0.0f64;
    let mut worst_identity = 0.0f64;
    let cases: Vec<(usize, RadialMultiplier, Box<dyn Fn(f64) -> f64>, Vec<f64>)> = vec![
        (
            1,
            RadialMultiplier::from_fn(|r: f64| (-r * r).exp()),
            Box::new(|x: f64| (4.0 * PI).powf(-0.5) * (-x * x / 4.0).exp()),
            (0..50).map(|i| 0.1 * i as f64).collect(),
        ),
        (
            3,
            RadialMultiplier::from_fn(|r: f64| (-r * r).exp()),
            Box::new(|x: f64| (4.0 * PI).powf(-1.5) * (-x * x / 4.0).exp()),
            (0..50).map(|i| 0.1 * i as f64).collect(),
        ),
        (
            1,
            RadialMultiplier::from_fn(|r: f64| (-r).exp()),
            Box::new(|x: f64| 1.0 / (PI * (1.0 + x * x))),
            (0..50).map(|i| 0.4 * i as f64).collect(),
        ),
    ];
    for (n, m, exact, radii) in &cases {
        let prof = hankel_inverse(m, *n, radii, &quad).unwrap();
        for (r, v) in radii.iter().zip(&prof.values) {
            worst_point = worst_point.max((v / exact(*r) - 1.0).abs());
        }
        // Plancherel and the value at the origin on a full profile.
        let full = profile_on_plan(m, *n, &plan_for_multiplier(m, None), &quad).unwrap();
        let l2 = lr_norm(&full, 2.0).unwrap().value;
        let mm = m.clone();
        let l2_hat = (2.0 * PI).powf(-0.5 * *n as f64) * multiplier_l2(&move |r| mm.eval(r), *n, 60.0);
        worst_identity = worst_identity.max((l2 / l2_hat - 1.0).abs());
        let k0 = full.values[0];
        let rule = dampwave::spectra::quad::gl_rule(32);
        let int: f64 = (0..120)
            .map(|i| {
                let (a, b) = (0.5 * i as f64, 0.5 * (i + 1) as f64);
                dampwave::spectra::quad::gl_panel(&|r: f64| m.eval(r) * r.powi(*n as i32 - 1), a, b, &rule)
            })
            .sum();
        let k0_hat = (2.0 * PI).powi(-(*n as i32)) * sphere_area(*n) * int;
        worst_identity = worst_identity.max((k0 / k0_hat - 1.0).abs());
    }
    outcome(
        worst_point <= 1e-6 && worst_identity <= 1e-4,
        format!("kernels max rel {worst_point:.2e} (≤ 1e−6); Plancherel/origin max rel {worst_identity:.2e} (≤ 1e−4)"),
    )
}

fn crit3() -> Outcome {
    let e = crucial_experiment(
        2.0,
        2,
        pair(1.0, 2.0),
        &log_grid(1e-4, 1e-1, 10),
        &QuadratureSpec::default(),
        &Tolerances::default(),
    )
    .unwrap();
    let coef = e.extras["l2_log_coefficient"];
    outcome(
        e.passed(),
        format!(
            "norm² vs −log τ: coefficient {coef:.4} (target 2π = {:.4} ± 10%; {}), ratio to π {:.4}",
            2.0 * PI,
            e.fits[0].notes.join(", "),
            coef / PI
        ),
    )
}

/// Sup over `r` of the closed-form θ = 2 kernel in three dimensions.
fn crucial_closed_form_sup(tau: f64) -> f64 {
    let k = |r: f64| {
        let c = 1.0 / (2.0 * PI * PI * r) * PI.sqrt() / (4.0 * tau);
        c * ((-(r - 1.0).powi(2) / (4.0 * tau * tau)).exp() - (-(r + 1.0).powi(2) / (4.0 * tau * tau)).exp())
    };
    let (mut lo, mut hi) = (0.5f64, 1.5f64);
    for _ in 0..6 {
        let xs: Vec<f64> = (0..=400).map(|i| lo + (hi - lo) * i as f64 / 400.0).collect();
        let best = xs.iter().cloned().fold(xs[0], |b, x| if k(x) > k(b) { x } else { b });
        let h = (hi - lo) / 400.0;
        lo = (best - 2.0 * h).max(1e-9);
        hi = best + 2.0 * h;
    }
    k(0.5 * (lo + hi))
}

fn crit4() -> Outcome {
    let taus = log_grid(1e-3, 1e-1, 9);
    let quad = QuadratureSpec::default();
    let e = crucial_experiment(2.0, 3, pair(1.0, INF), &taus, &quad, &Tolerances::default()).unwrap();
    let mut worst = 0.0f64;
    for p in &e.sweeps[0].points {
        let v = p.report.as_ref().map(|r| r.value).unwrap_or(f64::NAN);
        worst = worst.max((v / crucial_closed_form_sup(p.x) - 1.0).abs());
    }
    outcome(
        e.passed() && worst <= 1e-3,
        format!("{}; closed-form sup agreement max rel {worst:.2e} (≤ 1e−3)", slopes(&e)),
    )
}

fn crit5() -> Outcome {
    let k = SpectralKernel::new(zoo("viscoelastic", 3), KernelBand::Low).unwrap();
    let grid = log_grid(10.0, 1e3, 13);
    let tol = Tolerances::default();
    let mut ok = true;
    let mut detail = Vec::new();
    for pq in [pair(1.0, INF), pair(1.0, 1.0)] {
        let (e, note) = asymptotic_check(&k, pq, &grid, &tol);
        ok &= e.passed();
        detail.push(note);
    }
    outcome(ok, detail.join("; "))
}

fn crit6() -> Outcome {
    let grid = log_grid(10.0, 1e3, 13);
    let tol = Tolerances { power: 0.07, ..Tolerances::default() };
    let mut ok = true;
    let mut detail = Vec::new();
    for n in [1, 2] {
        let k = SpectralKernel::new(zoo("classical", n), KernelBand::Low).unwrap();
        let (e, note) = asymptotic_check(&k, pair(1.0, INF), &grid, &tol);
        ok &= e.passed();
        detail.push(format!("n={n}: {note}"));
    }
    outcome(ok, detail.join("; "))
}

fn crit7() -> Outcome {
    let k = SpectralKernel::new(zoo_with("fractional", "theta", 0.5, 3), KernelBand::High).unwrap();
    let grid = log_grid(1e-3, 1e-1, 13);
    let tol = Tolerances { power: 0.15, ..Tolerances::default() };
    let (e, note) = asymptotic_check(&k, pair(1.0, INF), &grid, &tol);
    outcome(e.passed(), note)
}

fn crit8() -> Outcome {
    let quad = QuadratureSpec::default();
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, lo, hi) in [("classical", 50.0, 600.0), ("viscoelastic", 5.0, 80.0)] {
        let e = k12_exponential_check(&zoo(name, 3), pair(1.0, INF), &log_grid(lo, hi, 12), &quad, &Direct).unwrap();
        ok &= e.passed();
        detail.push(format!(
            "{name}: semi-log slope {:.4} vs −c/2 = {:.4} ({})",
            e.fits[0].slope,
            -0.5 * e.extras["c"],
            e.fits[0].notes.join(", ")
        ));
    }
    outcome(ok, detail.join("; "))
}

fn crit9() -> Outcome {
    let quad = QuadratureSpec::default();
    let grid = log_grid(1.0, 100.0, 9);
    let mut ok = true;
    let mut detail = Vec::new();
    for (n, theta, eta) in [(1, 2.0, 0.0), (1, 0.5, 0.0), (1, 2.0, 1.0), (3, 2.0, 0.0)] {
        let sym = zoo_with("fractional", "theta", theta, n);
        let e = lemma_exp_check(&sym, INF, eta, &grid, KernelBand::Full, &quad, 0.05).unwrap();
        ok &= e.passed();
        detail.push(format!(
            "({n},{theta},{eta}) {:.4} vs {:.4}",
            e.fits[0].slope,
            e.prediction.exponent.unwrap()
        ));
    }
    outcome(ok, detail.join("; "))
}

fn crit10() -> Outcome {
    let e = taylor_sharpness(&zoo("viscoelastic", 3), &log_grid(10.0, 1e3, 9), &QuadratureSpec::default(), 0.2).unwrap();
    outcome(
        e.passed(),
        format!(
            "main-term slope {:.4}, residual slope {:.4} (need ≤ {:.4})",
            e.extras["main_slope"],
            e.extras["residual_slope"],
            e.extras["main_slope"] - 0.2
        ),
    )
}

fn crit11() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut fails = Vec::new();

    // Partition of unity.
    let loc = Localizer::for_symbol(&zoo("viscoelastic", 3)).unwrap();
    let pou = (0..5000)
        .map(|_| {
            let r = 10f64.powf(rng.gen_range(-3.0..3.0));
            (loc.phi0(r) + loc.mid(r) + loc.phi1(r) - 1.0).abs()
        })
        .fold(0.0, f64::max);
    if pou > 1e-15 {
        fails.push(format!("partition of unity {pou:e}"));
    }

    // |K̂| ≤ t and branch continuity at a = 2|ξ|.
    let mut bound = 0.0f64;
    let mut jump = 0.0f64;
    for _ in 0..5000 {
        let (a, w, t) = (rng.gen_range(0.0..20.0), rng.gen_range(0.0..20.0), rng.gen_range(0.0..20.0));
        bound = bound.max(khat_mode(a, w, t).abs() - t);
        // Neighbouring floats around each regime switch.
        let w = rng.gen_range(0.01..10.0);
        let t = rng.gen_range(0.0..10.0);
        for edge in [2.0 * w * (1.0 - EPS_DEG), 2.0 * w, 2.0 * w * (1.0 + EPS_DEG)] {
            let (lo, hi) = (f64::from_bits(edge.to_bits() - 1), f64::from_bits(edge.to_bits() + 1));
            jump = jump.max((khat_mode(hi, w, t) - khat_mode(lo, w, t)).abs());
        }
    }
    if bound > 0.0 {
        fails.push(format!("|K̂| exceeds t by {bound:e}"));
    }
    if jump > 1e-9 {
        fails.push(format!("branch jump {jump:e}"));
    }

    // Energy is nonincreasing along oracle trajectories.
    for _ in 0..20 {
        let (a, w) = (rng.gen_range(0.0..5.0), rng.gen_range(0.0..5.0));
        let traj = ode_trajectory(a, w, 10.0, 4000).unwrap();
        let e: Vec<f64> = traj.iter().map(|&(_, y, v)| v * v + w * w * y * y).collect();
        if e.windows(2).any(|p| p[1] > p[0] * (1.0 + 1e-12) + 1e-15) {
            fails.push(format!("energy increased for a={a}, ω={w}"));
        }
    }

    // Bessel three-term recurrence.
    let mut rec = 0.0f64;
    for _ in 0..2000 {
        // Integer and half-integer orders, the ones radial inversion uses.
        let nu = 0.5 * rng.gen_range(2..13) as f64;
        let z: f64 = rng.gen_range(0.1..80.0);
        let lhs = bessel_j(nu - 1.0, z).unwrap() + bessel_j(nu + 1.0, z).unwrap();
        let rhs = 2.0 * nu / z * bessel_j(nu, z).unwrap();
        rec = rec.max((lhs - rhs).abs());
    }
    if rec > 1e-9 {
        fails.push(format!("Bessel recurrence {rec:e}"));
    }

    // Duality of d(p, q).
    for _ in 0..20 {
        let p = 1.0 + rng.gen_range(0.0..4.0);
        let q = p + rng.gen_range(0.0..6.0);
        let (pd, qd) = (q / (q - 1.0), if p == 1.0 { INF } else { p / (p - 1.0) });
        if (d_exponent(p, q, 3) - d_exponent(pd, qd, 3)).abs() > 1e-12 {
            fails.push(format!("d duality at ({p},{q})"));
        }
    }

    // Log-convexity of r ↦ ‖K‖_r in 1/r, determinism, sandwich.
    let quad = QuadratureSpec::default();
    let k = SpectralKernel::new(zoo("classical", 3), KernelBand::Low).unwrap();
    let m = k.radial_multiplier(20.0).unwrap();
    let prof = profile_on_plan(&m, 3, &plan_for_multiplier(&m, None), &quad).unwrap();
    let inv = [0.0, 0.25, 0.5, 0.75, 1.0];
    let logs: Vec<f64> = inv
        .iter()
        .map(|&s| {
            let r = if s == 0.0 { INF } else { 1.0 / s };
            op_norm_exact_p1(&prof, r, None).unwrap().value.ln()
        })
        .collect();
    if logs.windows(3).any(|w| w[1] > 0.5 * (w[0] + w[2]) + 1e-9) {
        fails.push(format!("log-convexity {logs:?}"));
    }
    let grid = log_grid(10.0, 1e3, 8);
    let spec = NormSpec { kind: NormKind::OpExactP1, pair: pair(1.0, INF) };
    let csv = |_: ()| {
        let t = sweep_norms(&k, spec, &grid, Transform::Hankel, &quad, &Direct).unwrap();
        t.points
            .iter()
            .map(|p| p.report.as_ref().unwrap().csv_row())
            .collect::<Vec<_>>()
            .join("\n")
    };
    if csv(()) != csv(()) {
        fails.push("nondeterministic sweep".into());
    }
    let pq = pair(1.5, 3.0);
    let upper = sweep_norms(&k, NormSpec { kind: NormKind::OpUpperYoung, pair: pq }, &grid, Transform::Hankel, &quad, &Direct)
        .unwrap();
    let lower = sweep_norms(&k, NormSpec { kind: NormKind::OpLowerTest, pair: pq }, &grid, Transform::Hankel, &quad, &Direct)
        .unwrap();
    for (u, l) in upper.points.iter().zip(&lower.points) {
        let (u, l) = (u.report.as_ref().unwrap(), l.report.as_ref().unwrap());
        if l.value - l.quad_error > u.value + u.quad_error {
            fails.push(format!("sandwich at t={:?}: {} > {}", l.meta.t, l.value, u.value));
        }
    }
    let detail = if fails.is_empty() {
        "partition of unity, |K̂| ≤ t, branch continuity, energy, Bessel recurrence, d duality, log-convexity, determinism, sandwich".into()
    } else {
        fails.join("; ")
    };
    outcome(fails.is_empty(), detail)
}

fn main() {
    let criteria: Vec<(u32, &str, fn() -> Outcome)> = vec![
        (1, "mode oracle equivalence", crit1),
        (2, "exact kernel suite", crit2),
        (3, "crucial n=2 (1,2) log coefficient", crit3),
        (4, "crucial n=3 (1,inf) theta=2 slope", crit4),
        (5, "viscoelastic n=3 low band", crit5),
        (6, "classical damping diffusion rate", crit6),
        (7, "fractional theta=1/2 high band singularity", crit7),
        (8, "mid band exponential decay", crit8),
        (9, "diffusion kernel scaling", crit9),
        (10, "profile sharpness", crit10),
        (11, "property suites", crit11),
    ];
    let only: Option<u32> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|s| s.parse().ok());
    let mut unexpected = 0;
    for (id, name, f) in criteria {
        if only.is_some_and(|o| o != id) {
            continue;
        }
        let start = Instant::now();
        let o = f();
        let secs = start.elapsed().as_secs_f64();
        let known = KNOWN_RED.iter().find(|(k, _)| *k == id);
        println!(
            "{} criterion {id} ({name}): {} [{secs:.1}s]",
            if o.passed { "PASS" } else { "FAIL" },
            o.detail
        );
        match (o.passed, known) {
            (false, Some((_, why))) => println!("     known deviation: {why}"),
            (false, None) => unexpected += 1,
            _ => {}
        }
    }
    if unexpected > 0 {
        println!("{unexpected} unexpected failure(s)");
        std::process::exit(1);
    }
}
