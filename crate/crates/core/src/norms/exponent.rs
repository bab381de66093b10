use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lebesgue pair with `1 ≤ p ≤ q ≤ ∞`; `∞` is `f64::INFINITY`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PQPair {
    #[serde(with = "serde_exp")]
    pub p: f64,
    #[serde(with = "serde_exp")]
    pub q: f64,
    /// Set when the pair was replaced by `(q′, p′)`.
    pub dual_reduced: bool,
}

/// Hölder conjugate, `1′ = ∞`, `∞′ = 1`.
pub fn conjugate(x: f64) -> f64 {
    if x == 1.0 {
        f64::INFINITY
    } else if x.is_infinite() {
        1.0
    } else {
        x / (x - 1.0)
    }
}

impl PQPair {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !(p >= 1.0 && q >= p) {
            return Err(Error::InvalidParams {
                name: "pq".into(),
                reason: format!("need 1 ≤ p ≤ q ≤ ∞, got ({p}, {q})"),
            });
        }
        Ok(Self {
            p,
            q,
            dual_reduced: false,
        })
    }

    pub fn dual(&self) -> Self {
        Self {
            p: conjugate(self.q),
            q: conjugate(self.p),
            dual_reduced: !self.dual_reduced,
        }
    }

    /// Representative with `q ≤ p′`, i.e. `1/p + 1/q ≥ 1`.
    pub fn reduced(&self) -> Self {
        if 1.0 / self.p + 1.0 / self.q >= 1.0 {
            *self
        } else {
            self.dual()
        }
    }

    /// `1/p − 1/q`.
    pub fn gap(&self) -> f64 {
        1.0 / self.p - 1.0 / self.q
    }

    /// Young exponent `r` with `1 − 1/r = 1/p − 1/q`.
    pub fn young_exponent(&self) -> f64 {
        // Exact at the endpoints so that p = 1 reuses r = q bit for bit.
        if self.p == 1.0 {
            return self.q;
        }
        if self.p == self.q {
            return 1.0;
        }
        let inv = 1.0 - self.gap();
        if inv == 0.0 {
            f64::INFINITY
        } else {
            1.0 / inv
        }
    }

    pub fn label(&self) -> String {
        format!("({},{})", fmt_exp(self.p), fmt_exp(self.q))
    }
}

pub fn fmt_exp(x: f64) -> String {
    if x.is_infinite() {
        "inf".into()
    } else {
        format!("{x}")
    }
}

pub fn parse_exp(s: &str) -> Result<f64> {
    match s.trim() {
        "inf" | "infinity" | "∞" => Ok(f64::INFINITY),
        v => v.parse().map_err(|_| Error::Config(format!("bad exponent `{s}`"))),
    }
}

/// Exponents in JSON/TOML: numbers, with `∞` spelled `"inf"`.
pub mod serde_exp {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*x)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(x),
            Raw::Str(s) => super::parse_exp(&s).map_err(de::Error::custom),
        }
    }

    pub mod option {
        use serde::{Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
            match x {
                Some(v) => super::serialize(v, s),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
            #[derive(Deserialize)]
            struct W(#[serde(with = "super")] f64);
            Ok(Option::<W>::deserialize(d)?.map(|w| w.0))
        }
    }
}

/// `d(p,q) = n(1/p − 1/q) + (n−1)·max{1/2 − 1/p, 1/q − 1/2}`.
pub fn d_exponent(p: f64, q: f64, n: usize) -> f64 {
    let (ip, iq) = (1.0 / p, 1.0 / q);
    let nf = n as f64;
    nf * (ip - iq) + (nf - 1.0) * (0.5 - ip).max(iq - 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let inf = f64::INFINITY;
        assert_eq!(d_exponent(1.0, inf, 3), 2.0);
        assert_eq!(d_exponent(1.0, 1.0, 3), 1.0);
        assert_eq!(d_exponent(2.0, 2.0, 5), 0.0);
        assert_eq!(d_exponent(1.0, 2.0, 2), 1.0);
        assert_eq!(d_exponent(2.0, inf, 2), 1.0);
    }

    #[test]
    fn pairs() {
        let p = PQPair::new(1.0, 2.0).unwrap();
        let d = p.dual();
        assert_eq!((d.p, d.q), (2.0, f64::INFINITY));
        assert!(d.dual_reduced);
        assert_eq!(d.reduced().p, 1.0);
        assert!(PQPair::new(2.0, 1.0).is_err());
        assert_eq!(PQPair::new(1.0, 1.0).unwrap().young_exponent(), 1.0);
        assert_eq!(PQPair::new(1.0, f64::INFINITY).unwrap().young_exponent(), f64::INFINITY);
        assert_eq!(parse_exp("inf").unwrap(), f64::INFINITY);
        assert_eq!(PQPair::new(1.0, 3.0).unwrap().young_exponent(), 3.0);
        assert!((PQPair::new(4.0 / 3.0, 4.0).unwrap().young_exponent() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn infinite_exponent_round_trips_json() {
        let p = PQPair::new(1.0, f64::INFINITY).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.contains("\"inf\""));
        assert_eq!(serde_json::from_str::<PQPair>(&s).unwrap(), p);
    }
}
