//! Content-addressed disk cache of radial kernel profiles.
//!
//! Entries are written to a temporary file and renamed into place, so a
//! reader sees either nothing or a complete profile.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::rates::{profile_on_plan, GridPlan, ProfileKey, ProfileSource};
use crate::spectra::{hankel_point, ProfileMeta, QuadratureSpec, RadialMultiplier, RadialProfile, NORMALIZATION};

pub const CACHE_ENV: &str = "DAMPWAVE_CACHE_DIR";
const DEFAULT_DIR: &str = ".dampwave-cache";
const TMP_PREFIX: &str = ".tmp-";

/// Agreement required between a cached value and a fresh evaluation.
pub const REVALIDATION_TOL: f64 = 1e-12;

/// `$DAMPWAVE_CACHE_DIR`, or `.dampwave-cache` in the working directory.
pub fn cache_dir() -> PathBuf {
    std::env::var_os(CACHE_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(DEFAULT_DIR))
}

#[derive(Serialize)]
struct KeyMaterial<'a> {
    definition: &'a str,
    dim: usize,
    band: &'a str,
    t_bits: u64,
    plan: &'a GridPlan,
    quadrature: &'a QuadratureSpec,
    normalization: &'a str,
}

/// Hex sha256 over the symbol definition, band, `t`, grid plan, quadrature
/// settings and normalization tag.
pub fn cache_key(key: &ProfileKey, plan: &GridPlan, quad: &QuadratureSpec) -> String {
    let material = KeyMaterial {
        definition: &key.definition,
        dim: key.dim,
        band: &key.band,
        t_bits: key.t.to_bits(),
        plan,
        quadrature: quad,
        normalization: NORMALIZATION,
    };
    hex::encode(Sha256::digest(serde_json::to_vec(&material).expect("key material serializes")))
}

/// Outcome of the per-run spot check of one cached profile.
#[derive(Clone, Debug, PartialEq)]
pub struct Revalidation {
    pub key: String,
    pub r: f64,
    pub cached: f64,
    pub fresh: f64,
    pub passed: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CacheStats {
    pub hits: usize,
    pub misses: usize,
    pub writes: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CacheListing {
    pub entries: usize,
    pub bytes: u64,
    /// Leftovers of interrupted writes; never read.
    pub temporaries: usize,
}

pub struct ProfileCache {
    dir: PathBuf,
    seed: u64,
    hits: AtomicUsize,
    misses: AtomicUsize,
    writes: AtomicUsize,
    tmp_counter: AtomicUsize,
    checked: AtomicBool,
    revalidation: Mutex<Option<Revalidation>>,
}

impl ProfileCache {
    pub fn open(dir: &Path, seed: u64) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            seed,
            hits: AtomicUsize::new(0),
            misses: AtomicUsize::new(0),
            writes: AtomicUsize::new(0),
            tmp_counter: AtomicUsize::new(0),
            checked: AtomicBool::new(false),
            revalidation: Mutex::new(None),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn entry_path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.csv"))
    }

    pub fn get(&self, key: &str) -> Option<RadialProfile> {
        let text = fs::read_to_string(self.entry_path(key)).ok()?;
        RadialProfile::from_csv(&text).ok()
    }

    /// Writes `prof` under `key` via a uniquely named temporary and a rename.
    pub fn put(&self, key: &str, prof: &RadialProfile) -> Result<()> {
        let n = self.tmp_counter.fetch_add(1, Ordering::Relaxed);
        let tmp = self.dir.join(format!("{TMP_PREFIX}{key}-{}-{n}", std::process::id()));
        fs::write(&tmp, prof.to_csv()).map_err(|e| Error::Io(format!("{}: {e}", tmp.display())))?;
        fs::rename(&tmp, self.entry_path(key)).map_err(|e| {
            let _ = fs::remove_file(&tmp);
            Error::Io(format!("publishing cache entry {key}: {e}"))
        })?;
        self.writes.fetch_add(1, Ordering::Relaxed);
        Ok(())
    }

    pub fn stats(&self) -> CacheStats {
        CacheStats {
            hits: self.hits.load(Ordering::Relaxed),
            misses: self.misses.load(Ordering::Relaxed),
            writes: self.writes.load(Ordering::Relaxed),
        }
    }

    pub fn revalidation(&self) -> Option<Revalidation> {
        self.revalidation.lock().unwrap().clone()
    }

    /// Recomputes one seeded-random radius of the first profile served from disk.
    fn spot_check(&self, key: &str, prof: &RadialProfile, m: &RadialMultiplier, quad: &QuadratureSpec) -> Result<()> {
        if self.checked.swap(true, Ordering::SeqCst) || prof.r_grid.is_empty() {
            return Ok(());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let i = rng.gen_range(0..prof.r_grid.len());
        let r = prof.r_grid[i];
        let fresh = hankel_point(m, prof.dim, r, quad)?.value;
        let cached = prof.values[i];
        let passed = (fresh - cached).abs() <= REVALIDATION_TOL * fresh.abs().max(cached.abs()).max(f64::MIN_POSITIVE);
        *self.revalidation.lock().unwrap() = Some(Revalidation {
            key: key.into(),
            r,
            cached,
            fresh,
            passed,
        });
        if passed {
            Ok(())
        } else {
            let _ = fs::remove_file(self.entry_path(key));
            Err(Error::Quadrature(format!(
                "cache entry {key} failed revalidation at r = {r:e}: cached {cached:e}, fresh {fresh:e}"
            )))
        }
    }

    pub fn list(&self) -> Result<CacheListing> {
        list_dir(&self.dir)
    }

    pub fn clear(&self) -> Result<usize> {
        clear_dir(&self.dir)
    }
}

impl ProfileSource for ProfileCache {
    fn profile(&self, key: &ProfileKey, m: &RadialMultiplier, plan: &GridPlan, quad: &QuadratureSpec) -> Result<RadialProfile> {
        let k = cache_key(key, plan, quad);
        if let Some(prof) = self.get(&k) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            self.spot_check(&k, &prof, m, quad)?;
            return Ok(prof);
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        let prof = profile_on_plan(m, key.dim, plan, quad)?.with_meta(ProfileMeta {
            t: Some(key.t),
            symbol_hash: hex::encode(&Sha256::digest(key.definition.as_bytes())[..8]),
            band: key.band.clone(),
        });
        self.put(&k, &prof)?;
        // Serve what a later run would read back.
        Ok(RadialProfile::from_csv(&prof.to_csv())?)
    }
}

pub fn list_dir(dir: &Path) -> Result<CacheListing> {
    let mut out = CacheListing::default();
    let Ok(rd) = fs::read_dir(dir) else {
        return Ok(out);
    };
    for e in rd.flatten() {
        let name = e.file_name().to_string_lossy().into_owned();
        if name.starts_with(TMP_PREFIX) {
            out.temporaries += 1;
        } else if name.ends_with(".csv") {
            out.entries += 1;
            out.bytes += e.metadata().map(|m| m.len()).unwrap_or(0);
        }
    }
    Ok(out)
}

/// Removes every entry and temporary; returns the number of files removed.
pub fn clear_dir(dir: &Path) -> Result<usize> {
    let Ok(rd) = fs::read_dir(dir) else {
        return Ok(0);
    };
    let mut n = 0;
    for e in rd.flatten() {
        let name = e.file_name().to_string_lossy().into_owned();
        if name.starts_with(TMP_PREFIX) || name.ends_with(".csv") {
            fs::remove_file(e.path())?;
            n += 1;
        }
    }
    Ok(n)
}
