//! Experiment runner: TOML configs, a profile cache, CSV/JSON reports and
//! the `dampwave` command line.

mod cache;
mod cli;
mod config;
mod run;

pub use cache::{cache_dir, cache_key, clear_dir, list_dir, CacheListing, CacheStats, ProfileCache, Revalidation, CACHE_ENV, REVALIDATION_TOL};
pub use cli::{main_with, Cli, Command};
pub use config::{parse_band, parse_pair, preset, Case, ExperimentConfig, FitSpec, Mode, NoClaimEntry, SweepSpec, VISCOELASTIC_N3};
pub use run::{run, sweeps_csv, RunOptions, RunOutcome, CODE_VERSION, SUMMARY_SCHEMA, SWEEPS_SCHEMA};
