//! Panel quadrature: Gauss–Legendre for smooth or mildly oscillatory
//! integrands and Levin collocation for `∫ G(ρ) e^{iκρ} dρ` with slowly
//! varying `G`, driven by a global adaptive bisection.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

pub type Rule = (Vec<f64>, Vec<f64>);

/// Gauss–Legendre rule with `points` nodes, cached per size.
pub fn gl_rule(points: usize) -> Arc<Rule> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Rule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("rule cache");
    guard.entry(points).or_insert_with(|| Arc::new(gauss_legendre(points))).clone()
}

/// Integrate a real function over `[a, b]` with one Gauss–Legendre panel.
pub fn gl_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rule: &(Vec<f64>, Vec<f64>)) -> f64 {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    let mut s = 0.0;
    for (x, w) in rule.0.iter().zip(&rule.1) {
        s += w * f(c + h * x);
    }
    s * h
}

const LEVIN_N: usize = 16;

struct Cheb {
    nodes: Vec<f64>,
    d: Vec<f64>,
}

fn cheb() -> &'static Cheb {
    static C: OnceLock<Cheb> = OnceLock::new();
    C.get_or_init(|| {
        let n = LEVIN_N - 1;
        let nodes: Vec<f64> = (0..=n).map(|j| (PI * j as f64 / n as f64).cos()).collect();
        let c: Vec<f64> = (0..=n)
            .map(|j| {
                let e = if j == 0 || j == n { 2.0 } else { 1.0 };
                e * if j % 2 == 0 { 1.0 } else { -1.0 }
            })
            .collect();
        let m = n + 1;
        let mut d = vec![0.0; m * m];
        for i in 0..m {
            let mut row = 0.0;
            for j in 0..m {
                if i != j {
                    let v = c[i] / c[j] / (nodes[i] - nodes[j]);
                    d[i * m + j] = v;
                    row += v;
                }
            }
            d[i * m + i] = -row;
        }
        Cheb { nodes, d }
    })
}

/// Solve a dense complex system with partial pivoting; `a` is row-major.
fn solve(a: &mut [Complex64], b: &mut [Complex64], n: usize) -> bool {
    for col in 0..n {
        let mut piv = col;
        let mut best = a[col * n + col].norm();
        for r in (col + 1)..n {
            let v = a[r * n + col].norm();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best == 0.0 || !best.is_finite() {
            return false;
        }
        if piv != col {
            for k in 0..n {
                a.swap(col * n + k, piv * n + k);
            }
            b.swap(col, piv);
        }
        let inv = a[col * n + col].inv();
        for r in (col + 1)..n {
            let f = a[r * n + col] * inv;
            if f == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k in col..n {
                let v = a[col * n + k];
                a[r * n + k] -= f * v;
            }
            let bv = b[col];
            b[r] -= f * bv;
        }
    }
    for col in (0..n).rev() {
        let mut s = b[col];
        for k in (col + 1)..n {
            s -= a[col * n + k] * b[k];
        }
        b[col] = s / a[col * n + col];
    }
    true
}

/// Levin collocation for `∫_a^b G(x) e^{iκx} dx`.
pub fn levin_panel<G: Fn(f64) -> Complex64>(g: &G, kappa: f64, a: f64, b: f64) -> Option<Complex64> {
    levin_phase_panel(g, &|x| kappa * x, a, b)
}

/// Levin collocation for `∫_a^b G(x) e^{iΦ(x)} dx`; `Φ'` is obtained by
/// spectral differentiation at the Chebyshev nodes. Declines (returns
/// `None`) when `Φ'` changes sign on the panel.
pub fn levin_phase_panel<G: Fn(f64) -> Complex64, P: Fn(f64) -> f64>(g: &G, phase: &P, a: f64, b: f64) -> Option<Complex64> {
    let ch = cheb();
    let n = LEVIN_N;
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    let pc = phase(c);
    let ph: Vec<f64> = ch.nodes.iter().map(|x| phase(c + h * x) - pc).collect();
    let dph: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|j| ch.d[i * n + j] * ph[j]).sum::<f64>() / h)
        .collect();
    let positive = dph[0] > 0.0;
    if dph.iter().any(|d| (*d > 0.0) != positive || *d == 0.0) {
        return None;
    }
    let mut mat = vec![Complex64::new(0.0, 0.0); n * n];
    let mut rhs = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n {
        for j in 0..n {
            mat[i * n + j] = Complex64::new(ch.d[i * n + j] / h, 0.0);
        }
        mat[i * n + i] += Complex64::new(0.0, dph[i]);
        rhs[i] = g(c + h * ch.nodes[i]);
    }
    if !solve(&mut mat, &mut rhs, n) {
        return None;
    }
    // nodes[0] = 1 maps to b, nodes[n−1] = −1 maps to a.
    let eb = Complex64::from_polar(1.0, ph[0]);
    let ea = Complex64::from_polar(1.0, ph[n - 1]);
    let v = (rhs[0] * eb - rhs[n - 1] * ea) * Complex64::from_polar(1.0, pc);
    if v.re.is_finite() && v.im.is_finite() {
        Some(v)
    } else {
        None
    }
}

/// Complex Gauss–Legendre panel for `∫ G e^{iΦ}`, with `∫|G|` on the side.
fn gl_osc_panel<G: Fn(f64) -> Complex64, P: Fn(f64) -> f64>(g: &G, phase: &P, a: f64, b: f64, rule: &Rule) -> (Complex64, f64) {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    let pc = phase(c);
    let mut s = Complex64::new(0.0, 0.0);
    let mut m = 0.0;
    for (x, w) in rule.0.iter().zip(&rule.1) {
        let xx = c + h * x;
        let v = g(xx);
        s += v * Complex64::from_polar(*w, phase(xx) - pc);
        m += w * v.norm();
    }
    (s * h * Complex64::from_polar(1.0, pc), m * h)
}

/// Phase change above which a panel switches from Gauss–Legendre to Levin.
const LEVIN_PHASE: f64 = 8.0;

fn raw_panel<G: Fn(f64) -> Complex64, P: Fn(f64) -> f64>(g: &G, phase: &P, a: f64, b: f64, rule: &Rule) -> (Complex64, f64) {
    if (phase(b) - phase(a)).abs() > LEVIN_PHASE {
        if let Some(v) = levin_phase_panel(g, phase, a, b) {
            let (_, mass) = gl_osc_panel(g, &|_| 0.0, a, b, rule);
            return (v, mass);
        }
    }
    gl_osc_panel(g, phase, a, b, rule)
}

#[derive(Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    err: f64,
    mass: f64,
    seq: usize,
}

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> Ordering {
        self.err
            .partial_cmp(&o.err)
            .unwrap_or(Ordering::Equal)
            .then_with(|| o.seq.cmp(&self.seq))
    }
}

fn eval_panel<G: Fn(f64) -> Complex64, P: Fn(f64) -> f64>(g: &G, phase: &P, a: f64, b: f64, seq: usize, rule: &Rule) -> Panel {
    let m = 0.5 * (a + b);
    let (whole, mass) = raw_panel(g, phase, a, b, rule);
    let (l, _) = raw_panel(g, phase, a, m, rule);
    let (r, _) = raw_panel(g, phase, m, b, rule);
    let halves = l + r;
    let mut err = (whole - halves).norm();
    if !err.is_finite() || !halves.re.is_finite() || !halves.im.is_finite() {
        err = f64::INFINITY;
    }
    Panel {
        a,
        b,
        value: halves,
        err,
        mass,
        seq,
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Integral {
    pub value: Complex64,
    pub err: f64,
    pub mass: f64,
    pub converged: bool,
}

/// Global adaptive integration of `∫ G(x) e^{iκx} dx` over consecutive panels.
pub fn adaptive_osc<G: Fn(f64) -> Complex64>(
    g: &G,
    kappa: f64,
    edges: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
    rule: &Rule,
) -> Integral {
    adaptive_phase(g, &|x| kappa * x, edges, abs_tol, rel_tol, max_panels, rule)
}

/// Global adaptive integration of `∫ G(x) e^{iΦ(x)} dx`: the panel with the
/// largest whole-versus-halves discrepancy is bisected until the summed
/// estimate meets `max(abs_tol, rel_tol·∫|G|)`.
pub fn adaptive_phase<G: Fn(f64) -> Complex64, P: Fn(f64) -> f64>(
    g: &G,
    phase: &P,
    edges: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
    rule: &Rule,
) -> Integral {
    let mut heap = BinaryHeap::with_capacity(edges.len() * 2);
    let mut seq = 0usize;
    let mut total_err = 0.0;
    let mut total_mass = 0.0;
    for w in edges.windows(2) {
        if w[1] > w[0] {
            let p = eval_panel(g, phase, w[0], w[1], seq, rule);
            seq += 1;
            total_err += p.err;
            total_mass += p.mass;
            heap.push(p);
        }
    }
    let mut count = heap.len();
    while count < max_panels {
        let tol = abs_tol.max(rel_tol * total_mass);
        if total_err <= tol {
            break;
        }
        let worst = match heap.pop() {
            Some(p) => p,
            None => break,
        };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            heap.push(Panel { err: 0.0, ..worst });
            total_err -= worst.err;
            continue;
        }
        let l = eval_panel(g, phase, worst.a, mid, seq, rule);
        let r = eval_panel(g, phase, mid, worst.b, seq + 1, rule);
        seq += 2;
        total_err += l.err + r.err - worst.err;
        total_mass += l.mass + r.mass - worst.mass;
        heap.push(l);
        heap.push(r);
        count += 1;
    }
    // Deterministic summation in panel order.
    let mut panels = heap.into_vec();
    panels.sort_by(|x, y| x.a.partial_cmp(&y.a).unwrap_or(Ordering::Equal));
    let mut value = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    let mut mass = 0.0;
    for p in &panels {
        value += p.value;
        err += p.err;
        mass += p.mass;
    }
    Integral {
        value,
        err,
        mass,
        converged: err <= abs_tol.max(rel_tol * mass),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_integrates_polynomials() {
        let rule = gauss_legendre(16);
        let v = gl_panel(&|x: f64| x.powi(30), -1.0, 1.0, &rule);
        assert!((v - 2.0 / 31.0).abs() < 1e-14);
        assert!((rule.1.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let r64 = gauss_legendre(64);
        let v = gl_panel(&|x: f64| x.exp(), 0.0, 1.0, &r64);
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn levin_on_exponential() {
        // ∫_0^10 e^{-x} e^{i 50 x} dx = (1 − e^{−10+500i})/(1 − 50i)
        let g = |x: f64| Complex64::new((-x).exp(), 0.0);
        let v = levin_panel(&g, 50.0, 0.0, 1.0).unwrap();
        let k = Complex64::new(-1.0, 50.0);
        let exact = ((k * 1.0).exp() - 1.0) / k;
        assert!((v - exact).norm() < 1e-12, "{v} {exact}");
    }

    #[test]
    fn levin_with_quadratic_phase() {
        // ∫_1^3 e^{i 40 x²} · 80x dx = −i (e^{360i} − e^{40i})
        let g = |x: f64| Complex64::new(80.0 * x, 0.0);
        let v = levin_phase_panel(&g, &|x| 40.0 * x * x, 1.0, 3.0).unwrap();
        let exact = Complex64::new(0.0, -1.0) * (Complex64::from_polar(1.0, 360.0) - Complex64::from_polar(1.0, 40.0));
        // One panel spans many periods of a chirp; accuracy is limited by the interpolant of Φ.
        assert!((v - exact).norm() < 1e-6, "{v} {exact}");
        assert!(levin_phase_panel(&g, &|x| (x - 2.0).powi(2) * 40.0, 1.0, 3.0).is_none());
    }

    #[test]
    fn adaptive_oscillatory_decay() {
        let g = |x: f64| Complex64::new(1.0 / (1.0 + x * x), 0.0);
        let edges: Vec<f64> = (0..=40).map(|k| k as f64 * 25.0).collect();
        let res = adaptive_osc(&g, 3.0, &edges, 1e-13, 1e-13, 10_000, &gl_rule(16));
        // ∫_0^1000 cos(3x)/(1+x²) ≈ (π/2)e^{−3} minus a tail of size ~1e−6/3.
        assert!((res.value.re - 0.5 * PI * (-3f64).exp()).abs() < 1e-6);
        assert!(res.converged);
    }
}
