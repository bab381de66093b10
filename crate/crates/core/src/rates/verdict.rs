use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::fit::{Certified, FitResult};
use super::prediction::Prediction;
use crate::norms::{fmt_exp, serde_exp};

pub const VERDICT_SCHEMA: &str = "dampwave-verdicts v1";
pub const VERDICT_CSV_HEADER: &str = "case,band,n,p,q,theta,predicted,fitted,residual,tol,verdict,certified";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub case: String,
    pub band: String,
    pub n: usize,
    #[serde(with = "serde_exp")]
    pub p: f64,
    #[serde(with = "serde_exp")]
    pub q: f64,
    pub theta: f64,
    pub predicted: Option<f64>,
    pub fitted: f64,
    pub residual: f64,
    pub tol: Option<f64>,
    pub passed: bool,
    pub certified: Option<Certified>,
    pub law: String,
    pub window: [f64; 2],
    pub notes: Vec<String>,
}

impl Verdict {
    pub fn from_fit(pred: &Prediction, band: &str, fit: &FitResult) -> Self {
        Self {
            case: pred.case.as_str().into(),
            band: band.into(),
            n: pred.n,
            p: pred.p,
            q: pred.q,
            theta: pred.theta,
            predicted: fit.predicted.or(pred.exponent),
            fitted: fit.slope,
            residual: fit.residual_rms,
            tol: fit.tol,
            passed: fit.passed(),
            certified: fit.certified,
            law: fit.law.clone(),
            window: fit.window,
            notes: fit.notes.clone(),
        }
    }

    pub fn csv_row(&self) -> String {
        let opt = |x: Option<f64>| x.map(|v| format!("{v:e}")).unwrap_or_default();
        let cert = match self.certified {
            Some(Certified::TwoSided) => "two_sided",
            Some(Certified::NotSlower) => "not_slower",
            Some(Certified::NotFaster) => "not_faster",
            None => "",
        };
        format!(
            "{},{},{},{},{},{},{},{:e},{:e},{},{},{}",
            self.case,
            self.band,
            self.n,
            fmt_exp(self.p),
            fmt_exp(self.q),
            self.theta,
            opt(self.predicted),
            self.fitted,
            self.residual,
            opt(self.tol),
            if self.passed { "pass" } else { "fail" },
            cert
        )
    }
}

pub fn verdicts_csv(rows: &[Verdict]) -> String {
    let mut s = String::new();
    writeln!(s, "# {VERDICT_SCHEMA}").unwrap();
    writeln!(s, "{VERDICT_CSV_HEADER}").unwrap();
    for r in rows {
        writeln!(s, "{}", r.csv_row()).unwrap();
    }
    s
}
