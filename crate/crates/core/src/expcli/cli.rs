//! The `dampwave` command line.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use super::cache::{cache_dir, clear_dir, list_dir, ProfileCache};
use super::config::{preset, ExperimentConfig, Mode, SweepSpec};
use super::run::{run, RunOptions, RunOutcome};
use crate::error::{Error, Result};
use crate::norms::fmt_exp;
use crate::oscillator::{KernelBand, SpectralKernel};
use crate::rates::{front_of, plan_for_multiplier, Direct, ProfileKey, ProfileSource};
use crate::spectra::{ProfileMeta, QuadratureSpec};
use crate::symbolkit::{mh_check, model_zoo, zoo_catalog, Band};

#[derive(Parser, Debug)]
#[command(name = "dampwave", version, about = "Fundamental solutions of damped wave equations and their decay rates")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum BandArg {
    Low,
    Mid,
    High,
    Full,
}

impl From<BandArg> for KernelBand {
    fn from(b: BandArg) -> Self {
        match b {
            BandArg::Low => KernelBand::Low,
            BandArg::Mid => KernelBand::Mid,
            BandArg::High => KernelBand::High,
            BandArg::Full => KernelBand::Full,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum MhBand {
    Low,
    High,
    Both,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum CacheAction {
    Inspect,
    Clear,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// List the model symbols and their parameters.
    Zoo,
    /// Mikhlin–Hörmander screening of a zoo symbol.
    Mhcheck {
        #[arg(long)]
        symbol: String,
        /// Symbol parameter, `key=value`; repeatable.
        #[arg(long = "param", value_parser = parse_kv)]
        params: Vec<(String, f64)>,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, value_enum, default_value_t = MhBand::Both)]
        band: MhBand,
        #[arg(long, default_value_t = 6)]
        shells: usize,
        #[arg(long, default_value_t = 48)]
        samples: usize,
    },
    /// Dump one radial kernel profile as CSV.
    Kernel {
        #[arg(long)]
        symbol: String,
        #[arg(long = "param", value_parser = parse_kv)]
        params: Vec<(String, f64)>,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, value_enum, default_value_t = BandArg::Low)]
        band: BandArg,
        #[arg(long)]
        t: f64,
        /// Output file (default: standard output).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        no_cache: bool,
    },
    /// Norm of sinc(|ξ|)e^{−(τ|ξ|)^θ} as τ → 0.
    Crucial {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: String,
        #[arg(long)]
        q: String,
        #[arg(long, default_value_t = 2.0)]
        theta: f64,
        #[arg(long, default_value_t = 1e-4)]
        tau_from: f64,
        #[arg(long, default_value_t = 1e-1)]
        tau_to: f64,
        #[arg(long, default_value_t = 10)]
        points: usize,
        #[arg(long, default_value = "dampwave-out/crucial")]
        out: PathBuf,
        #[arg(long)]
        tolerance_scale: Option<f64>,
    },
    /// Run a configured theorem experiment.
    Sweep {
        #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
        config: Option<PathBuf>,
        /// Shipped configuration: viscoelastic_n3.
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        tolerance_scale: Option<f64>,
        #[arg(long)]
        no_cache: bool,
    },
    /// Inspect or clear the profile cache ($DAMPWAVE_CACHE_DIR).
    Cache {
        #[arg(value_enum)]
        action: CacheAction,
    },
}

fn parse_kv(s: &str) -> std::result::Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("`{s}` is not key=value"))?;
    let v: f64 = v.trim().parse().map_err(|_| format!("`{v}` is not a number"))?;
    Ok((k.trim().to_string(), v))
}

fn report(outcome: &RunOutcome) {
    for v in &outcome.verdicts {
        println!(
            "{} {} {} n={} ({},{}) fitted {:.4} predicted {} [{}]",
            if v.passed { "pass" } else { "FAIL" },
            v.case,
            v.band,
            v.n,
            fmt_exp(v.p),
            fmt_exp(v.q),
            v.fitted,
            v.predicted.map(|p| format!("{p:.4}")).unwrap_or_else(|| "-".into()),
            v.notes.join("; ")
        );
    }
    for e in &outcome.experiments {
        for (k, x) in &e.extras {
            println!("  {}: {k} = {x:.6}", e.name);
        }
    }
    for n in &outcome.no_claim {
        println!("no claim: {n}");
    }
    for a in &outcome.aborted {
        println!("ABORTED {a}");
    }
    println!("reports in {}", outcome.out_dir.display());
}

fn execute(cli: Cli) -> Result<i32> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    match cli.command {
        Command::Zoo => {
            for e in zoo_catalog() {
                println!("{:<18} a = {:<26} {}", e.name, e.formula, e.params);
            }
            Ok(0)
        }
        Command::Mhcheck { symbol, params, n, band, shells, samples } => {
            let sym = model_zoo(&symbol, &params.into_iter().collect(), n)?;
            let bands = match band {
                MhBand::Low => vec![Band::Low],
                MhBand::High => vec![Band::High],
                MhBand::Both => vec![Band::Low, Band::High],
            };
            let reports = bands
                .into_iter()
                .map(|b| mh_check(&sym, b, shells, samples))
                .collect::<Result<Vec<_>>>()?;
            println!("{}", serde_json::to_string_pretty(&reports).map_err(|e| Error::Io(e.to_string()))?);
            Ok(0)
        }
        Command::Kernel { symbol, params, n, band, t, out, no_cache } => {
            let params: BTreeMap<String, f64> = params.into_iter().collect();
            let sym = model_zoo(&symbol, &params, n)?;
            let hash = sym.hash();
            let kernel = SpectralKernel::new(sym, band.into())?;
            let m = kernel.radial_multiplier(t)?;
            let plan = plan_for_multiplier(&m, front_of(&m));
            let key = ProfileKey {
                definition: String::from_utf8_lossy(&kernel.sym.definition_bytes()).into_owned(),
                dim: n,
                band: kernel.band.as_str().into(),
                t,
            };
            let quad = QuadratureSpec::default();
            let prof = if no_cache {
                Direct.profile(&key, &m, &plan, &quad)?
            } else {
                ProfileCache::open(&cache_dir(), 0)?.profile(&key, &m, &plan, &quad)?
            };
            let prof = prof.with_meta(ProfileMeta {
                t: Some(t),
                symbol_hash: hash,
                band: kernel.band.as_str().into(),
            });
            match out {
                Some(p) => prof.write(&p)?,
                None => print!("{}", prof.to_csv()),
            }
            Ok(0)
        }
        Command::Crucial { n, p, q, theta, tau_from, tau_to, points, out, tolerance_scale } => {
            let cfg = ExperimentConfig {
                mode: Mode::Crucial,
                symbol: None,
                bands: vec![],
                pairs: vec![format!("{p},{q}")],
                dims: vec![n],
                sweep: SweepSpec { from: tau_from, to: tau_to, points },
                band_sweeps: BTreeMap::new(),
                theta,
                quadrature: QuadratureSpec::default(),
                tolerances: Default::default(),
                fit: Default::default(),
                seed: 0,
                output: out,
                expect_no_claim: vec![],
            };
            let outcome = run(&cfg, &RunOptions { tolerance_scale, ..Default::default() })?;
            report(&outcome);
            Ok(outcome.status())
        }
        Command::Sweep { config, preset: name, out, seed, tolerance_scale, no_cache } => {
            let cfg = match (config, name) {
                (Some(path), _) => ExperimentConfig::load(&path)?,
                (None, Some(name)) => preset(&name)?,
                (None, None) => return Err(Error::Config("--config or --preset is required".into())),
            };
            let opts = RunOptions {
                out,
                seed,
                tolerance_scale,
                cache_dir: (!no_cache).then(cache_dir),
            };
            let outcome = run(&cfg, &opts)?;
            report(&outcome);
            Ok(outcome.status())
        }
        Command::Cache { action } => {
            let dir = cache_dir();
            match action {
                CacheAction::Inspect => {
                    let l = list_dir(&dir)?;
                    println!(
                        "{}: {} entries, {} bytes, {} temporaries",
                        dir.display(),
                        l.entries,
                        l.bytes,
                        l.temporaries
                    );
                }
                CacheAction::Clear => println!("removed {} files from {}", clear_dir(&dir)?, dir.display()),
            }
            Ok(0)
        }
    }
}

/// Parses `args` and runs the command; returns the process exit status.
/// Argument errors exit 2, runtime errors 1.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
