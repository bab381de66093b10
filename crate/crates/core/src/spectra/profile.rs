//! Physical-space kernel samples and their CSV exchange format.
//!
//! A profile file starts with `#`-prefixed header rows
//!
//! ```text
//! # dampwave-profile v1
//! # dim=3
//! # t=10
//! # symbol=3fa2c0d19be47a10
//! # band=low
//! # normalization=(2pi)^-n
//! r,value,quad_error
//! ```
//!
//! followed by one row per radius. Floats are written in shortest
//! round-trip form, so reading a file back reproduces the profile exactly.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inverse transform convention `f(x) = (2π)^{−n} ∫ e^{ixξ} f̂(ξ) dξ`.
pub const NORMALIZATION: &str = "(2pi)^-n";
pub const PROFILE_SCHEMA: &str = "dampwave-profile v1";
pub const GRID_SCHEMA: &str = "dampwave-grid v1";

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ProfileMeta {
    pub t: Option<f64>,
    pub symbol_hash: String,
    pub band: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub dim: usize,
    pub r_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub quad_error: Vec<f64>,
    /// Indices whose quadrature missed its error target.
    pub flagged: Vec<usize>,
    pub meta: ProfileMeta,
}

impl RadialProfile {
    pub fn new(dim: usize, r_grid: Vec<f64>, values: Vec<f64>, quad_error: Vec<f64>) -> Result<Self> {
        let p = Self {
            dim,
            r_grid,
            values,
            quad_error,
            flagged: Vec::new(),
            meta: ProfileMeta::default(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.r_grid.len();
        if n == 0 || self.values.len() != n || self.quad_error.len() != n {
            return Err(Error::Quadrature("profile arrays have mismatched lengths".into()));
        }
        if !(self.r_grid[0] >= 0.0) || self.r_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Quadrature("r_grid must be nonnegative and strictly increasing".into()));
        }
        if let Some(i) = self.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Quadrature(format!("non-finite value at r = {}", self.r_grid[i])));
        }
        Ok(())
    }

    pub fn with_meta(mut self, meta: ProfileMeta) -> Self {
        self.meta = meta;
        self
    }

    pub fn max_quad_error(&self) -> f64 {
        self.quad_error.iter().cloned().fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# {PROFILE_SCHEMA}").unwrap();
        writeln!(s, "# dim={}", self.dim).unwrap();
        match self.meta.t {
            Some(t) => writeln!(s, "# t={t:e}").unwrap(),
            None => writeln!(s, "# t=none").unwrap(),
        }
        writeln!(s, "# symbol={}", self.meta.symbol_hash).unwrap();
        writeln!(s, "# band={}", self.meta.band).unwrap();
        writeln!(s, "# normalization={NORMALIZATION}").unwrap();
        let flagged: Vec<String> = self.flagged.iter().map(|i| i.to_string()).collect();
        writeln!(s, "# flagged={}", flagged.join(";")).unwrap();
        writeln!(s, "r,value,quad_error").unwrap();
        for i in 0..self.r_grid.len() {
            writeln!(s, "{:e},{:e},{:e}", self.r_grid[i], self.values[i], self.quad_error[i]).unwrap();
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let header = parse_header(text, PROFILE_SCHEMA)?;
        let mut r = Vec::new();
        let mut v = Vec::new();
        let mut e = Vec::new();
        for line in data_rows(text, "r,value,quad_error")? {
            let cols = parse_floats(line, 3)?;
            r.push(cols[0]);
            v.push(cols[1]);
            e.push(cols[2]);
        }
        let mut p = Self::new(header.dim, r, v, e)?;
        p.flagged = header.flagged;
        p.meta = header.meta;
        Ok(p)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_csv(&std::fs::read_to_string(path)?)
    }
}

/// Kernel samples on the lattice `x_j = −L + j·2L/N` per axis, row-major
/// with the last axis fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridField {
    pub dim: usize,
    pub extent: f64,
    pub points_per_axis: usize,
    pub values: Vec<f64>,
    pub aliasing_bound: f64,
    /// Set when the aliasing bound exceeds `10⁻³` of the in-band mass.
    pub flagged: bool,
    pub meta: ProfileMeta,
}

impl GridField {
    pub fn spacing(&self) -> f64 {
        2.0 * self.extent / self.points_per_axis as f64
    }

    pub fn coordinate(&self, j: usize) -> f64 {
        -self.extent + j as f64 * self.spacing()
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Value at a multi-index.
    pub fn at(&self, idx: &[usize]) -> f64 {
        let mut k = 0;
        for &i in idx {
            k = k * self.points_per_axis + i;
        }
        self.values[k]
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# {GRID_SCHEMA}").unwrap();
        writeln!(s, "# dim={}", self.dim).unwrap();
        match self.meta.t {
            Some(t) => writeln!(s, "# t={t:e}").unwrap(),
            None => writeln!(s, "# t=none").unwrap(),
        }
        writeln!(s, "# symbol={}", self.meta.symbol_hash).unwrap();
        writeln!(s, "# band={}", self.meta.band).unwrap();
        writeln!(s, "# normalization={NORMALIZATION}").unwrap();
        writeln!(s, "# extent={:e}", self.extent).unwrap();
        writeln!(s, "# points_per_axis={}", self.points_per_axis).unwrap();
        writeln!(s, "# aliasing_bound={:e}", self.aliasing_bound).unwrap();
        writeln!(s, "# flagged={}", if self.flagged { "1" } else { "" }).unwrap();
        writeln!(s, "value").unwrap();
        for v in &self.values {
            writeln!(s, "{v:e}").unwrap();
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let h = parse_header(text, GRID_SCHEMA)?;
        let get = |k: &str| -> Result<&str> {
            h.extra
                .iter()
                .find(|(key, _)| key == k)
                .map(|(_, v)| v.as_str())
                .ok_or_else(|| Error::Config(format!("grid header lacks `{k}`")))
        };
        let extent: f64 = parse_num(get("extent")?)?;
        let points_per_axis: usize = get("points_per_axis")?
            .parse()
            .map_err(|_| Error::Config("bad points_per_axis".into()))?;
        let aliasing_bound: f64 = parse_num(get("aliasing_bound")?)?;
        let flagged = get("flagged")? == "1";
        let mut values = Vec::new();
        for line in data_rows(text, "value")? {
            values.push(parse_floats(line, 1)?[0]);
        }
        if values.len() != points_per_axis.pow(h.dim as u32) {
            return Err(Error::Config("grid value count does not match N^n".into()));
        }
        Ok(Self {
            dim: h.dim,
            extent,
            points_per_axis,
            values,
            aliasing_bound,
            flagged,
            meta: h.meta,
        })
    }
}

struct Header {
    dim: usize,
    meta: ProfileMeta,
    flagged: Vec<usize>,
    extra: Vec<(String, String)>,
}

fn parse_num(s: &str) -> Result<f64> {
    s.trim().parse().map_err(|_| Error::Config(format!("bad number `{s}`")))
}

fn parse_header(text: &str, schema: &str) -> Result<Header> {
    let mut lines = text.lines();
    match lines.next() {
        Some(l) if l.trim_start_matches('#').trim() == schema => {}
        _ => return Err(Error::Config(format!("expected `{schema}` header"))),
    }
    let mut dim = None;
    let mut meta = ProfileMeta::default();
    let mut flagged = Vec::new();
    let mut extra = Vec::new();
    for l in lines.take_while(|l| l.starts_with('#')) {
        let body = l.trim_start_matches('#').trim();
        let (k, v) = body.split_once('=').ok_or_else(|| Error::Config(format!("bad header `{l}`")))?;
        match k {
            "dim" => dim = Some(v.parse().map_err(|_| Error::Config("bad dim".into()))?),
            "t" => meta.t = if v == "none" { None } else { Some(parse_num(v)?) },
            "symbol" => meta.symbol_hash = v.to_string(),
            "band" => meta.band = v.to_string(),
            "normalization" => {
                if v != NORMALIZATION {
                    return Err(Error::Config(format!("unknown normalization `{v}`")));
                }
            }
            "flagged" if schema == PROFILE_SCHEMA => {
                for s in v.split(';').filter(|s| !s.is_empty()) {
                    flagged.push(s.parse().map_err(|_| Error::Config("bad flagged list".into()))?);
                }
            }
            _ => extra.push((k.to_string(), v.to_string())),
        }
    }
    Ok(Header {
        dim: dim.ok_or_else(|| Error::Config("header lacks dim".into()))?,
        meta,
        flagged,
        extra,
    })
}

fn data_rows<'a>(text: &'a str, columns: &str) -> Result<impl Iterator<Item = &'a str>> {
    let mut it = text.lines().skip_while(|l| l.starts_with('#'));
    match it.next() {
        Some(l) if l.trim() == columns => Ok(it.filter(|l| !l.trim().is_empty())),
        _ => Err(Error::Config(format!("expected column row `{columns}`"))),
    }
}

fn parse_floats(line: &str, count: usize) -> Result<Vec<f64>> {
    let v: Vec<f64> = line.split(',').map(parse_num).collect::<Result<_>>()?;
    if v.len() != count {
        return Err(Error::Config(format!("expected {count} columns in `{line}`")));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_exact() {
        let mut p = RadialProfile::new(3, vec![0.0, 0.1, 1.0 / 3.0], vec![1.0, -2.5e-17, PI_ISH], vec![1e-15, 0.0, 3e-14]).unwrap();
        p.flagged = vec![2];
        p.meta = ProfileMeta {
            t: Some(0.1),
            symbol_hash: "abcd".into(),
            band: "low".into(),
        };
        let back = RadialProfile::from_csv(&p.to_csv()).unwrap();
        assert_eq!(back, p);
    }

    const PI_ISH: f64 = 3.141592653589793;

    #[test]
    fn rejects_bad_grids() {
        assert!(RadialProfile::new(1, vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 0.0]).is_err());
        assert!(RadialProfile::new(1, vec![0.0, 1.0], vec![1.0, f64::NAN], vec![0.0, 0.0]).is_err());
        assert!(RadialProfile::from_csv("# dampwave-profile v1\n# dim=1\n# normalization=unitary\nr,value,quad_error\n").is_err());
    }

    #[test]
    fn grid_round_trip() {
        let g = GridField {
            dim: 2,
            extent: 4.0,
            points_per_axis: 2,
            values: vec![1.0, 2.0, 3.0, 0.1],
            aliasing_bound: 1e-9,
            flagged: false,
            meta: ProfileMeta::default(),
        };
        let back = GridField::from_csv(&g.to_csv()).unwrap();
        assert_eq!(back, g);
        assert_eq!(g.at(&[1, 0]), 3.0);
        assert_eq!(g.coordinate(1), 0.0);
    }
}
