use serde::{Deserialize, Serialize};

use super::exponent::{fmt_exp, serde_exp};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormKind {
    Lr,
    OpExactP1,
    OpExactP2Q2,
    OpUpperYoung,
    OpLowerTest,
}

impl NormKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            NormKind::Lr => "lr",
            NormKind::OpExactP1 => "exact_p1",
            NormKind::OpExactP2Q2 => "exact_p2q2",
            NormKind::OpUpperYoung => "upper_young",
            NormKind::OpLowerTest => "lower_test",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NormMeta {
    pub t: Option<f64>,
    pub tau: Option<f64>,
    pub symbol_hash: String,
    pub band: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub kind: NormKind,
    pub value: f64,
    #[serde(with = "serde_exp::option")]
    pub r: Option<f64>,
    #[serde(with = "serde_exp::option")]
    pub p: Option<f64>,
    #[serde(with = "serde_exp::option")]
    pub q: Option<f64>,
    pub quad_error: f64,
    /// Some contributing quadrature missed its target.
    pub flagged: bool,
    pub meta: NormMeta,
}

pub const NORM_CSV_HEADER: &str = "symbol,band,kind,p,q,r,t,tau,value,quad_error";

fn opt(x: Option<f64>) -> String {
    x.map(fmt_exp).unwrap_or_default()
}

impl NormReport {
    pub fn with_meta(mut self, meta: NormMeta) -> Self {
        self.meta = meta;
        self
    }

    pub fn relative_error(&self) -> f64 {
        if self.value > 0.0 {
            self.quad_error / self.value
        } else {
            f64::INFINITY
        }
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{:e},{:e}",
            self.meta.symbol_hash,
            self.meta.band,
            self.kind.as_str(),
            opt(self.p),
            opt(self.q),
            opt(self.r),
            self.meta.t.map(|t| format!("{t:e}")).unwrap_or_default(),
            self.meta.tau.map(|t| format!("{t:e}")).unwrap_or_default(),
            self.value,
            self.quad_error
        )
    }
}
