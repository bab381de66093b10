//! `L^r` norms of kernels and `L^p → L^q` operator norms of multipliers,
//! reported as exact values, Young upper bounds or test-function lower bounds.

mod exponent;
mod lr;
mod ops;
mod report;
mod testfn;

pub use exponent::{conjugate, d_exponent, fmt_exp, parse_exp, serde_exp, PQPair};
pub use lr::{jump_cells, lr_norm, lr_norm_grid, lr_norm_refined, sphere_area, GUARD_CELLS};
pub use ops::{default_probe, op_norm_exact_p1, op_norm_exact_p2q2, op_norm_lower_test, op_norm_upper_young};
pub use report::{NormKind, NormMeta, NormReport, NORM_CSV_HEADER};
pub use testfn::{TestProfile, TestShape};
