use crate::error::{Error, Result};

fn check(a: f64, omega: f64, t_end: f64, steps: usize) -> Result<f64> {
    if !(a >= 0.0 && omega >= 0.0 && t_end >= 0.0) {
        return Err(Error::OracleRefused("need a, ω, t ≥ 0".into()));
    }
    if steps == 0 {
        return Err(Error::OracleRefused("zero steps".into()));
    }
    let h = t_end / steps as f64;
    if (a + omega) * h > 0.1 {
        return Err(Error::OracleRefused(format!(
            "(a + ω)·h = {} exceeds 0.1; use more steps",
            (a + omega) * h
        )));
    }
    Ok(h)
}

fn rk4_step(a: f64, w2: f64, y: f64, v: f64, h: f64) -> (f64, f64) {
    let acc = |y: f64, v: f64| -w2 * y - a * v;
    let (k1y, k1v) = (v, acc(y, v));
    let (k2y, k2v) = (v + 0.5 * h * k1v, acc(y + 0.5 * h * k1y, v + 0.5 * h * k1v));
    let (k3y, k3v) = (v + 0.5 * h * k2v, acc(y + 0.5 * h * k2y, v + 0.5 * h * k2v));
    let (k4y, k4v) = (v + h * k3v, acc(y + h * k3y, v + h * k3v));
    (
        y + h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y),
        v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v),
    )
}

/// RK4 for the mode equation from `(K̂, K̂_t) = (0, 1)`; returns both at `t_end`.
pub fn ode_oracle(a: f64, omega: f64, t_end: f64, steps: usize) -> Result<(f64, f64)> {
    let h = check(a, omega, t_end, steps)?;
    let (mut y, mut v) = (0.0, 1.0);
    for _ in 0..steps {
        (y, v) = rk4_step(a, omega * omega, y, v, h);
    }
    Ok((y, v))
}

/// Every step of [`ode_oracle`] as `(t, K̂, K̂_t)`, starting at `t = 0`.
pub fn ode_trajectory(a: f64, omega: f64, t_end: f64, steps: usize) -> Result<Vec<(f64, f64, f64)>> {
    let h = check(a, omega, t_end, steps)?;
    let (mut y, mut v) = (0.0, 1.0);
    let mut out = Vec::with_capacity(steps + 1);
    out.push((0.0, y, v));
    for i in 0..steps {
        (y, v) = rk4_step(a, omega * omega, y, v, h);
        out.push(((i + 1) as f64 * h, y, v));
    }
    Ok(out)
}
