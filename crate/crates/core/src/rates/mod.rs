//! Predicted rates for every theorem regime, norm sweeps over time or
//! scale, least-squares fits and pass/fail verdicts.

mod experiments;
mod fit;
mod grid;
mod prediction;
mod sweep;
mod verdict;

pub use experiments::{
    crucial_experiment, crucial_multiplier, k12_exponential_check, lemma_exp_check, multiplier_l2, norm_plan,
    taylor_sharpness, theorem_check, upper_envelope, Experiment, Tolerances,
};
pub use fit::{fit_loglaw, fit_power, fit_semilog, Certified, FitResult, FitWindow, Sample, MIN_POINTS};
pub use grid::{bandwidth, plan_for_multiplier, profile_on_plan, GridPart, GridPlan};
pub use prediction::{claim_for, lemma_exp_prediction, predicted_exponent, Case, Claim, LogLaw, Prediction, RegimeEnd};
pub use sweep::{
    check_grid, front_of, log_grid, multiplier_norm, sweep_norms, test_scale, Direct, NormSpec, ProfileKey, ProfileSource, SweepPoint,
    SweepTable, Transform,
};
pub use verdict::{verdicts_csv, Verdict, VERDICT_CSV_HEADER, VERDICT_SCHEMA};
