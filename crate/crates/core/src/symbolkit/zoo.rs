use std::collections::BTreeMap;
use std::sync::Arc;

use super::{finish, invalid, norm, DissipationSymbol, Evaluator, Raw, RadialFn, SymbolDef, SymbolFlags};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct ZooEntry {
    pub name: &'static str,
    pub formula: &'static str,
    pub params: &'static str,
}

const CATALOG: &[ZooEntry] = &[
    ZooEntry { name: "viscoelastic", formula: "|ξ|²", params: "" },
    ZooEntry { name: "fractional", formula: "|ξ|^θ", params: "theta > 0" },
    ZooEntry { name: "classical", formula: "1", params: "" },
    ZooEntry { name: "scale_invariant", formula: "μ|ξ|", params: "mu > 0 (default 1)" },
    ZooEntry { name: "double_dispersion", formula: "|ξ|²/(1+|ξ|²)", params: "" },
    ZooEntry { name: "plate", formula: "|ξ|^θ/(1+|ξ|²)", params: "theta > 0" },
    ZooEntry { name: "double_damping", formula: "1+|ξ|²", params: "" },
    ZooEntry { name: "log_damping", formula: "log(1+|ξ|^θ)", params: "theta > 0" },
    ZooEntry { name: "anisotropic", formula: "(Σ c_jk ξ_j ξ_k)^{θ/2}", params: "theta > 0, cJK (1-based, symmetric positive definite, default identity)" },
    ZooEntry { name: "directional", formula: "2 + ξ₁/|ξ|", params: "" },
    ZooEntry { name: "perturbed", formula: "|ξ|^θ + sin(|ξ|^{-η})", params: "theta > 0 (default 1.5), eta (default -2)" },
];

pub fn zoo_catalog() -> &'static [ZooEntry] {
    CATALOG
}

fn param(params: &BTreeMap<String, f64>, key: &str, default: Option<f64>, name: &str) -> Result<f64> {
    match params.get(key).copied().or(default) {
        Some(v) if v.is_finite() => Ok(v),
        Some(_) => Err(invalid(name, &format!("{key} must be finite"))),
        None => Err(invalid(name, &format!("missing parameter {key}"))),
    }
}

fn positive(v: f64, key: &str, name: &str) -> Result<f64> {
    if v > 0.0 {
        Ok(v)
    } else {
        Err(invalid(name, &format!("{key} must be > 0")))
    }
}

fn radial(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Option<RadialFn> {
    Some(Arc::new(f))
}

/// Build a zoo symbol in dimension `dim`.
pub fn model_zoo(name: &str, params: &BTreeMap<String, f64>, dim: usize) -> Result<DissipationSymbol> {
    if dim == 0 {
        return Err(invalid(name, "dimension must be ≥ 1"));
    }
    let def = SymbolDef::Zoo {
        name: name.to_string(),
        params: params.clone(),
    };
    let mut flags = SymbolFlags::default();
    let mut evaluate: Option<Evaluator> = None;
    let (theta0, theta1, rad): (f64, f64, Option<RadialFn>) = match name {
        "viscoelastic" => (2.0, 2.0, radial(|r| r * r)),
        "fractional" => {
            let th = positive(param(params, "theta", None, name)?, "theta", name)?;
            (th, th, radial(move |r| r.powf(th)))
        }
        "classical" => (0.0, 0.0, radial(|_| 1.0)),
        "scale_invariant" => {
            let mu = positive(param(params, "mu", Some(1.0), name)?, "mu", name)?;
            (1.0, 1.0, radial(move |r| mu * r))
        }
        "double_dispersion" => (2.0, 0.0, radial(|r| r * r / (1.0 + r * r))),
        "plate" => {
            let th = positive(param(params, "theta", None, name)?, "theta", name)?;
            if th < 2.0 {
                flags.regularity_loss = true;
            }
            (th, th - 2.0, radial(move |r| r.powf(th) / (1.0 + r * r)))
        }
        "double_damping" => (0.0, 2.0, radial(|r| 1.0 + r * r)),
        "log_damping" => {
            let th = positive(param(params, "theta", None, name)?, "theta", name)?;
            flags.log_high = true;
            (th, 0.0, radial(move |r| (r.powf(th)).ln_1p()))
        }
        "anisotropic" => {
            let th = positive(param(params, "theta", Some(2.0), name)?, "theta", name)?;
            let c = coefficient_matrix(params, dim, name)?;
            let lam = min_eigenvalue(&c, dim);
            if !(lam > 0.0) {
                return Err(invalid(name, "coefficient matrix must be positive definite"));
            }
            let is_multiple_of_identity = (0..dim).all(|j| {
                (0..dim).all(|k| {
                    let target = if j == k { c[0] } else { 0.0 };
                    (c[j * dim + k] - target).abs() <= 1e-15 * c[0].abs()
                })
            });
            if is_multiple_of_identity {
                let s = c[0];
                (th, th, radial(move |r| (s * r * r).powf(0.5 * th)))
            } else {
                evaluate = Some(Arc::new(move |xi: &[f64]| {
                    let n = xi.len();
                    let mut q = 0.0;
                    for j in 0..n {
                        for k in 0..n {
                            q += c[j * n + k] * xi[j] * xi[k];
                        }
                    }
                    q.powf(0.5 * th)
                }));
                (th, th, None)
            }
        }
        "directional" => {
            evaluate = Some(Arc::new(|xi: &[f64]| {
                let r = norm(xi);
                if r == 0.0 {
                    2.0
                } else {
                    2.0 + xi[0] / r
                }
            }));
            (0.0, 0.0, None)
        }
        "perturbed" => {
            let th = positive(param(params, "theta", Some(1.5), name)?, "theta", name)?;
            let eta = param(params, "eta", Some(-2.0), name)?;
            flags.screening_only = true;
            (th, th, radial(move |r| r.powf(th) + r.powf(-eta).sin()))
        }
        other => return Err(Error::UnknownSymbol(other.to_string())),
    };
    let raw = Raw {
        def,
        dim,
        theta0,
        theta1,
        label: name.to_string(),
        flags,
        radial: rad,
        evaluate,
    };
    finish(raw)
}

fn coefficient_matrix(params: &BTreeMap<String, f64>, dim: usize, name: &str) -> Result<Vec<f64>> {
    if dim > 9 {
        return Err(invalid(name, "anisotropic symbols support dim ≤ 9"));
    }
    let mut c = vec![0.0; dim * dim];
    for j in 0..dim {
        c[j * dim + j] = 1.0;
    }
    for (key, &v) in params {
        if let Some(rest) = key.strip_prefix('c') {
            let digits: Vec<usize> = rest.chars().filter_map(|ch| ch.to_digit(10).map(|d| d as usize)).collect();
            if digits.len() != 2 || rest.len() != 2 || digits[0] == 0 || digits[1] == 0 || digits[0] > dim || digits[1] > dim {
                return Err(invalid(name, &format!("bad coefficient key {key}")));
            }
            let (j, k) = (digits[0] - 1, digits[1] - 1);
            c[j * dim + k] = v;
            c[k * dim + j] = v;
        }
    }
    Ok(c)
}

/// Smallest eigenvalue of a symmetric matrix by Jacobi rotations.
fn min_eigenvalue(c: &[f64], n: usize) -> f64 {
    let mut a = c.to_vec();
    for _ in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = cs * akp - sn * akq;
                    a[k * n + q] = sn * akp + cs * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = cs * apk - sn * aqk;
                    a[q * n + k] = sn * apk + cs * aqk;
                }
            }
        }
    }
    (0..n).map(|j| a[j * n + j]).fold(f64::INFINITY, f64::min)
}
