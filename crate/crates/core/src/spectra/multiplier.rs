use std::sync::Arc;

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Non-oscillatory piece `f(ρ)` active on `[lo, hi)`. `osc` bounds the
/// rate of any mild oscillation inside `f` and limits panel widths.
#[derive(Clone)]
pub struct SmoothPart {
    pub f: RealFn,
    pub lo: f64,
    pub hi: f64,
    pub osc: f64,
}

/// Oscillatory piece `amp(ρ)·sin Φ(ρ)` active on `[lo, hi)`, with a slowly
/// varying `amp` and a monotone phase; `rate` bounds `|Φ'|`.
#[derive(Clone)]
pub struct Wave {
    pub amp: RealFn,
    pub phase: RealFn,
    pub rate: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Wave {
    pub fn eval(&self, rho: f64) -> f64 {
        (self.amp)(rho) * (self.phase)(rho).sin()
    }
}

/// Radial multiplier `m(ρ)` written as smooth pieces plus waves.
#[derive(Clone, Default)]
pub struct RadialMultiplier {
    pub smooth: Vec<SmoothPart>,
    pub waves: Vec<Wave>,
    /// Extra panel boundaries (plateau ends of cutoffs and similar).
    pub breakpoints: Vec<f64>,
    pub label: String,
}

impl RadialMultiplier {
    pub fn from_fn(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            smooth: vec![SmoothPart {
                f: Arc::new(f),
                lo: 0.0,
                hi: f64::INFINITY,
                osc: 0.0,
            }],
            ..Default::default()
        }
    }

    /// `amp(ρ)·sin(rate·ρ)` on `[0, ∞)`.
    pub fn from_wave(amp: impl Fn(f64) -> f64 + Send + Sync + 'static, rate: f64) -> Self {
        Self {
            waves: vec![Wave {
                amp: Arc::new(amp),
                phase: Arc::new(move |r| rate * r),
                rate,
                lo: 0.0,
                hi: f64::INFINITY,
            }],
            ..Default::default()
        }
    }

    /// `t·sinc(tρ)·factor(ρ)`: exact below `ρ = 4/t`, a wave of amplitude
    /// `factor/ρ` and phase `tρ` above.
    pub fn sinc_times(t: f64, factor: RealFn) -> Self {
        let split = 4.0 / t;
        let f0 = factor.clone();
        let core = SmoothPart {
            f: Arc::new(move |r: f64| {
                let x = t * r;
                let s = if x.abs() < 1e-4 { 1.0 - x * x / 6.0 } else { x.sin() / x };
                t * s * f0(r)
            }),
            lo: 0.0,
            hi: split,
            osc: t,
        };
        let wave = Wave {
            amp: Arc::new(move |r: f64| factor(r) / r),
            phase: Arc::new(move |r: f64| t * r),
            rate: t,
            lo: split,
            hi: f64::INFINITY,
        };
        Self {
            smooth: vec![core],
            waves: vec![wave],
            breakpoints: Vec::new(),
            label: String::new(),
        }
    }

    /// Largest inner oscillation rate of smooth parts overlapping `[lo, hi)`.
    pub fn smooth_osc(&self, lo: f64, hi: f64) -> f64 {
        self.smooth
            .iter()
            .filter(|p| p.lo < hi && p.hi > lo)
            .map(|p| p.osc)
            .fold(0.0, f64::max)
    }

    pub fn labeled(mut self, label: &str) -> Self {
        self.label = label.to_string();
        self
    }

    pub fn eval(&self, rho: f64) -> f64 {
        let mut s = 0.0;
        for p in &self.smooth {
            if rho >= p.lo && rho < p.hi {
                s += (p.f)(rho);
            }
        }
        for w in &self.waves {
            if rho >= w.lo && rho < w.hi {
                s += w.eval(rho);
            }
        }
        s
    }

    /// `Σ|smooth| + Σ|amp|`, a pointwise bound on `|m|`.
    pub fn envelope(&self, rho: f64) -> f64 {
        let mut s = 0.0;
        for p in &self.smooth {
            if rho >= p.lo && rho < p.hi {
                s += (p.f)(rho).abs();
            }
        }
        for w in &self.waves {
            if rho >= w.lo && rho < w.hi {
                s += (w.amp)(rho).abs();
            }
        }
        s
    }

    pub fn support(&self) -> (f64, f64) {
        let lo = self
            .smooth
            .iter()
            .map(|p| p.lo)
            .chain(self.waves.iter().map(|w| w.lo))
            .fold(f64::INFINITY, f64::min);
        let hi = self
            .smooth
            .iter()
            .map(|p| p.hi)
            .chain(self.waves.iter().map(|w| w.hi))
            .fold(0.0, f64::max);
        (lo.max(0.0), hi)
    }

    /// Largest oscillation rate carried by the waves.
    pub fn max_rate(&self) -> f64 {
        self.waves.iter().map(|w| w.rate.abs()).fold(0.0, f64::max)
    }

    /// Sorted, deduplicated panel boundaries inside the support.
    pub fn all_breakpoints(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.breakpoints.clone();
        for p in &self.smooth {
            v.push(p.lo);
            v.push(p.hi);
        }
        for w in &self.waves {
            v.push(w.lo);
            v.push(w.hi);
        }
        v.retain(|x| x.is_finite());
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v.dedup();
        v
    }

    /// Pointwise product with a non-oscillatory factor.
    pub fn times(&self, factor: RealFn) -> Self {
        let smooth = self
            .smooth
            .iter()
            .map(|p| {
                let (f, g) = (p.f.clone(), factor.clone());
                SmoothPart {
                    f: Arc::new(move |r| f(r) * g(r)),
                    ..p.clone()
                }
            })
            .collect();
        let waves = self
            .waves
            .iter()
            .map(|w| {
                let (a, g) = (w.amp.clone(), factor.clone());
                Wave {
                    amp: Arc::new(move |r| a(r) * g(r)),
                    ..w.clone()
                }
            })
            .collect();
        Self {
            smooth,
            waves,
            breakpoints: self.breakpoints.clone(),
            label: self.label.clone(),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.times(Arc::new(move |_| c))
    }

    /// Sum of two multipliers.
    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.smooth.extend(other.smooth.iter().cloned());
        out.waves.extend(other.waves.iter().cloned());
        out.breakpoints.extend(other.breakpoints.iter().cloned());
        out
    }

    /// Restrict to `[lo, hi)`.
    pub fn restricted(&self, lo: f64, hi: f64) -> Self {
        let mut out = self.clone();
        for p in &mut out.smooth {
            p.lo = p.lo.max(lo);
            p.hi = p.hi.min(hi);
        }
        for w in &mut out.waves {
            w.lo = w.lo.max(lo);
            w.hi = w.hi.min(hi);
        }
        out.smooth.retain(|p| p.hi > p.lo);
        out.waves.retain(|w| w.hi > w.lo);
        out
    }
}
