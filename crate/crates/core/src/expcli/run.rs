//! Orchestration of a configured experiment and its report files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::cache::ProfileCache;
use super::config::{Case, ExperimentConfig, FitSpec, Mode};
use crate::error::{Error, Result};
use crate::norms::NORM_CSV_HEADER;
use crate::oscillator::{KernelBand, SpectralKernel};
use crate::rates::{
    claim_for, crucial_experiment, k12_exponential_check, theorem_check, verdicts_csv, Claim, Direct, Experiment,
    FitWindow, ProfileSource, RegimeEnd, Transform, Verdict,
};

pub const SWEEPS_SCHEMA: &str = "dampwave-sweeps v1";
pub const SUMMARY_SCHEMA: &str = "dampwave-summary v1";
pub const CODE_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

/// Description of how radial grids are chosen, recorded in every summary.
const GRID_RULE: &str = "core [0, 40w] x121, front shell f±40w x241, background [0, 1.5·outer] x301, \
w = 1/bandwidth; up to 4 doublings of the outer radius at spacing π/(4·bandwidth) while r^{n-1}|K| \
on the last fifth exceeds 1e-4 of its peak; 6 bisection rounds on jumps > 2% of max|K|, at most 6000 radii";

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Overrides the configured output directory.
    pub out: Option<PathBuf>,
    /// Overrides the configured seed.
    pub seed: Option<u64>,
    /// Multiplies every tolerance.
    pub tolerance_scale: Option<f64>,
    /// Profile cache directory; `None` computes everything afresh.
    pub cache_dir: Option<PathBuf>,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub out_dir: PathBuf,
    pub experiments: Vec<Experiment>,
    pub verdicts: Vec<Verdict>,
    /// Experiments that ended in an error, with the message.
    pub aborted: Vec<String>,
    pub no_claim: Vec<String>,
}

impl RunOutcome {
    /// Process exit status: nonzero iff a verdict failed or a sweep aborted.
    pub fn status(&self) -> i32 {
        if self.aborted.is_empty() && self.verdicts.iter().all(|v| v.passed) {
            0
        } else {
            1
        }
    }
}

#[derive(Serialize)]
struct ExperimentSummary<'a> {
    name: &'a str,
    symbol_hash: Option<String>,
    prediction: &'a crate::rates::Prediction,
    grid: Vec<f64>,
    verdicts: &'a [Verdict],
    fits: &'a [crate::rates::FitResult],
    extras: &'a std::collections::BTreeMap<String, f64>,
    failed_points: Vec<(f64, String)>,
}

#[derive(Serialize)]
struct Summary<'a> {
    schema: &'a str,
    code_version: &'a str,
    seed: u64,
    config: &'a ExperimentConfig,
    tolerances: crate::rates::Tolerances,
    grid_rule: &'a str,
    passed: bool,
    experiments: Vec<ExperimentSummary<'a>>,
    no_claim: &'a [String],
    aborted: &'a [String],
}

fn window_for(spec: &FitSpec, end: RegimeEnd) -> FitWindow {
    FitWindow {
        lo: spec.lo,
        hi: spec.hi,
        drop_transient_decade: (spec.drop_transient_decade != Some(false)).then_some(end),
        ..FitWindow::default()
    }
}

fn case_label(c: &Case) -> String {
    format!("{} {} n={}", c.band.as_str(), c.pair.label(), c.dim)
}

fn run_case(cfg: &ExperimentConfig, case: &Case, tol: &crate::rates::Tolerances, source: &dyn ProfileSource) -> Result<Experiment> {
    let quad = &cfg.quadrature;
    if cfg.mode == Mode::Crucial {
        return crucial_experiment(cfg.theta, case.dim, case.pair, &cfg.sweep.grid(), quad, tol);
    }
    let sym = cfg.symbol_for(case.dim)?;
    let grid = cfg.sweep_for(case.band).grid();
    if case.band == KernelBand::Mid {
        return k12_exponential_check(&sym, case.pair, &grid, quad, source);
    }
    let pred = match claim_for(&sym, case.band, case.pair) {
        Claim::Predicted(p) => p,
        Claim::NoClaim(why) => return Err(Error::NotApplicable(why)),
    };
    let kernel = SpectralKernel::new(sym, case.band)?;
    let window = window_for(&cfg.fit, pred.regime_end);
    theorem_check(&kernel, case.pair, &grid, Transform::Hankel, quad, source, tol, &window)
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn sweeps_csv(experiments: &[Experiment]) -> String {
    let mut s = String::new();
    writeln!(s, "# {SWEEPS_SCHEMA}").unwrap();
    writeln!(s, "{NORM_CSV_HEADER}").unwrap();
    for e in experiments {
        for tab in &e.sweeps {
            for p in &tab.points {
                if let Some(r) = &p.report {
                    writeln!(s, "{}", r.csv_row()).unwrap();
                }
            }
        }
    }
    s
}

/// Validates `cfg`, runs every case and writes `sweeps.csv`, `verdicts.csv`
/// and `summary.json`. Validation errors leave the output directory untouched.
pub fn run(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunOutcome> {
    let cases = cfg.validate()?;
    let mut cfg = cfg.clone();
    if let Some(s) = opts.seed {
        cfg.seed = s;
    }
    let out_dir = opts.out.clone().unwrap_or_else(|| cfg.output.clone());
    let scale = opts.tolerance_scale.unwrap_or(1.0);
    if !(scale > 0.0) {
        return Err(Error::Config("tolerance scale must be > 0".into()));
    }
    let tol = cfg.tolerances.scaled(scale);
    fs::create_dir_all(&out_dir).map_err(|e| Error::Io(format!("{}: {e}", out_dir.display())))?;
    let cache = match &opts.cache_dir {
        Some(d) => Some(ProfileCache::open(d, cfg.seed)?),
        None => None,
    };
    let source: &dyn ProfileSource = match &cache {
        Some(c) => c,
        None => &Direct,
    };

    let mut experiments = Vec::new();
    let mut aborted = Vec::new();
    let mut no_claim = Vec::new();
    for case in &cases {
        if let Some(why) = &case.no_claim {
            no_claim.push(format!("{}: {why}", case_label(case)));
            continue;
        }
        match run_case(&cfg, case, &tol, source) {
            Ok(e) => experiments.push(e),
            Err(e) => aborted.push(format!("{}: {e}", case_label(case))),
        }
    }
    let verdicts: Vec<Verdict> = experiments.iter().flat_map(|e| e.verdicts.clone()).collect();

    let summaries = experiments
        .iter()
        .map(|e| ExperimentSummary {
            name: &e.name,
            symbol_hash: e
                .sweeps
                .iter()
                .flat_map(|t| t.points.iter())
                .find_map(|p| p.report.as_ref().map(|r| r.meta.symbol_hash.clone()))
                .filter(|h| !h.is_empty()),
            prediction: &e.prediction,
            grid: e.sweeps.first().map(|t| t.points.iter().map(|p| p.x).collect()).unwrap_or_default(),
            verdicts: &e.verdicts,
            fits: &e.fits,
            extras: &e.extras,
            failed_points: e
                .sweeps
                .iter()
                .flat_map(|t| t.points.iter())
                .filter_map(|p| p.error.clone().map(|m| (p.x, m)))
                .collect(),
        })
        .collect();
    let outcome_passed = aborted.is_empty() && verdicts.iter().all(|v| v.passed);
    let summary = Summary {
        schema: SUMMARY_SCHEMA,
        code_version: CODE_VERSION,
        seed: cfg.seed,
        config: &cfg,
        tolerances: tol,
        grid_rule: GRID_RULE,
        passed: outcome_passed,
        experiments: summaries,
        no_claim: &no_claim,
        aborted: &aborted,
    };
    let json = serde_json::to_string_pretty(&summary).map_err(|e| Error::Io(e.to_string()))?;
    write_file(&out_dir, "sweeps.csv", &sweeps_csv(&experiments))?;
    write_file(&out_dir, "verdicts.csv", &verdicts_csv(&verdicts))?;
    write_file(&out_dir, "summary.json", &(json + "\n"))?;
    if let Some(c) = &cache {
        let s = c.stats();
        eprintln!("cache {}: {} hits, {} misses, {} writes", c.dir().display(), s.hits, s.misses, s.writes);
        if let Some(v) = c.revalidation() {
            eprintln!(
                "cache revalidation at r = {:e}: {}",
                v.r,
                if v.passed { "ok" } else { "MISMATCH" }
            );
        }
    }
    Ok(RunOutcome {
        out_dir,
        experiments,
        verdicts,
        aborted,
        no_claim,
    })
}
