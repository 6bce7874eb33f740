//! Sweep configuration: a flat `key = value` text format.
//!
//! Blank lines and everything after `#` are ignored. Numeric grids accept a
//! single value, a comma-separated list, or an inclusive `start:stop:step`
//! range. An empty value gives an empty grid.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use gqd_core::discord::{GqdConfig, TruncationOptions};
use gqd_core::itebd::TrotterSchedule;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    ThreeBody,
    Xxz,
    Xy,
}

impl Model {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "three_body" => Ok(Model::ThreeBody),
            "xxz" => Ok(Model::Xxz),
            "xy" => Ok(Model::Xy),
            other => bail!("unknown model {other:?} (expected three_body, xxz or xy)"),
        }
    }

    /// Largest block size accepted in a sweep.
    pub fn n_cap(self) -> usize {
        match self {
            Model::ThreeBody => 24,
            Model::Xxz => 18,
            Model::Xy => 7,
        }
    }

    /// Config key of the coupling parameter.
    pub fn coupling_key(self) -> &'static str {
        match self {
            Model::ThreeBody => "g",
            Model::Xxz => "delta",
            Model::Xy => "gamma",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::ThreeBody => "three_body",
            Model::Xxz => "xxz",
            Model::Xy => "xy",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub model: Model,
    /// `g`, `Δ` or `γ` depending on the model.
    pub coupling: Vec<f64>,
    /// Transverse field `h`; used by the XY model only.
    pub field: Vec<f64>,
    pub n_min: usize,
    pub n_max: usize,
    pub bond_dimension: usize,
    pub seed: u64,
    pub gqd: GqdConfig,
    pub schedule: TrotterSchedule,
    /// Inclusive n-window for the linear fit; `None` uses the top half.
    pub fit_window: Option<(usize, usize)>,
    pub output: Option<PathBuf>,
    pub cache: bool,
    pub cache_dir: Option<PathBuf>,
    /// Resolved key-value pairs, used for hashing and the manifest.
    pub entries: BTreeMap<String, String>,
}

const KEYS: &[&str] = &[
    "model",
    "g",
    "delta",
    "gamma",
    "h",
    "n_min",
    "n_max",
    "bond_dimension",
    "seed",
    "tau",
    "grid_theta",
    "grid_phi",
    "starts",
    "max_iter",
    "dense_cap",
    "per_site",
    "fit_window",
    "output",
    "cache",
    "cache_dir",
];

impl SweepConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config file {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected `key = value`", lineno + 1))?;
            let mut key = key.trim().to_string();
            if key == "lambda" {
                key = "h".into();
            }
            if !KEYS.contains(&key.as_str()) {
                bail!("line {}: unknown key {key:?}", lineno + 1);
            }
            if entries.insert(key.clone(), value.trim().to_string()).is_some() {
                bail!("line {}: duplicate key {key:?}", lineno + 1);
            }
        }
        Self::from_entries(entries)
    }

    fn from_entries(entries: BTreeMap<String, String>) -> Result<Self> {
        let get = |k: &str| entries.get(k).map(String::as_str);
        let model = Model::parse(get("model").ok_or_else(|| anyhow!("missing key \"model\""))?)?;
        let allowed: &[&str] = match model {
            Model::ThreeBody => &["g"],
            Model::Xxz => &["delta"],
            Model::Xy => &["gamma", "h"],
        };
        for key in ["g", "delta", "gamma", "h"] {
            match (entries.contains_key(key), allowed.contains(&key)) {
                (true, false) => bail!("key {key:?} does not apply to model {model}"),
                (false, true) => bail!("model {model} needs key {key:?}"),
                _ => {}
            }
        }
        let coupling = parse_grid(get(model.coupling_key()).unwrap_or(""))
            .with_context(|| format!("key {:?}", model.coupling_key()))?;
        let field = match model {
            Model::Xy => parse_grid(get("h").unwrap_or("")).context("key \"h\"")?,
            _ => Vec::new(),
        };

        let defaults = GqdConfig::default();
        let n_min = parse_num(get("n_min"), 2usize, "n_min")?;
        let n_max = parse_num(get("n_max"), n_min.max(model.n_cap().min(12)), "n_max")?;
        if n_min < 2 || n_max < n_min {
            bail!("need 2 <= n_min <= n_max, got n_min={n_min}, n_max={n_max}");
        }
        if n_max > model.n_cap() {
            bail!("n_max={n_max} exceeds the cap {} for model {model}", model.n_cap());
        }
        let bond_dimension = parse_num(get("bond_dimension"), 16usize, "bond_dimension")?;
        if bond_dimension < 2 {
            bail!("bond_dimension must be at least 2");
        }
        let gqd = GqdConfig {
            grid_theta: parse_num(get("grid_theta"), defaults.grid_theta, "grid_theta")?,
            grid_phi: parse_num(get("grid_phi"), defaults.grid_phi, "grid_phi")?,
            starts: parse_num(get("starts"), defaults.starts, "starts")?,
            max_iter: parse_num(get("max_iter"), defaults.max_iter, "max_iter")?,
            dense_cap: parse_num(get("dense_cap"), defaults.dense_cap, "dense_cap")?,
            per_site: parse_bool(get("per_site"), defaults.per_site, "per_site")?,
            truncation: TruncationOptions {
                tau: parse_num(get("tau"), defaults.truncation.tau, "tau")?,
                ..defaults.truncation.clone()
            },
            ..defaults
        };
        if gqd.grid_theta < 2 || gqd.grid_phi < 1 || gqd.starts == 0 || gqd.truncation.tau == 0 {
            bail!("grid_theta >= 2, grid_phi >= 1, starts >= 1 and tau >= 1 are required");
        }
        let fit_window = match get("fit_window") {
            None | Some("auto") => None,
            Some(s) => {
                let (a, b) = s
                    .split_once(':')
                    .ok_or_else(|| anyhow!("fit_window must be `auto` or `n_lo:n_hi`, got {s:?}"))?;
                let lo: usize = a.trim().parse().context("fit_window")?;
                let hi: usize = b.trim().parse().context("fit_window")?;
                if hi < lo + 1 {
                    bail!("fit_window needs at least two sizes, got {s:?}");
                }
                Some((lo, hi))
            }
        };
        Ok(Self {
            model,
            coupling,
            field,
            n_min,
            n_max,
            bond_dimension,
            seed: parse_num(get("seed"), 1u64, "seed")?,
            gqd,
            schedule: TrotterSchedule::default(),
            fit_window,
            output: get("output").filter(|s| !s.is_empty()).map(PathBuf::from),
            cache: parse_bool(get("cache"), true, "cache")?,
            cache_dir: get("cache_dir").filter(|s| !s.is_empty()).map(PathBuf::from),
            entries,
        })
    }

    /// SHA-256 over the resolved entries, excluding output locations.
    pub fn hash(&self) -> String {
        let mut hasher = Sha256::new();
        for (k, v) in &self.entries {
            if k == "output" || k == "cache_dir" {
                continue;
            }
            hasher.update(format!("{k}={v}\n"));
        }
        hex::encode(hasher.finalize())
    }

    /// Parameter points in output order: coupling outer, field inner.
    pub fn points(&self) -> Vec<(f64, Option<f64>)> {
        match self.model {
            Model::Xy => self
                .coupling
                .iter()
                .flat_map(|&c| self.field.iter().map(move |&h| (c, Some(h))))
                .collect(),
            _ => self.coupling.iter().map(|&c| (c, None)).collect(),
        }
    }
}

fn parse_num<T: std::str::FromStr>(value: Option<&str>, default: T, key: &str) -> Result<T>
where
    T::Err: std::error::Error + Send + Sync + 'static,
{
    match value {
        None => Ok(default),
        Some(s) => s.parse().with_context(|| format!("key {key:?}: cannot parse {s:?}")),
    }
}

fn parse_bool(value: Option<&str>, default: bool, key: &str) -> Result<bool> {
    match value {
        None => Ok(default),
        Some("true" | "yes" | "1") => Ok(true),
        Some("false" | "no" | "0") => Ok(false),
        Some(s) => bail!("key {key:?}: expected true or false, got {s:?}"),
    }
}

/// Parses `x`, `a, b, c` or `start:stop:step` (inclusive).
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let [start, stop, step] = parts[..] else {
            bail!("range must be start:stop:step, got {s:?}");
        };
        let (start, stop, step): (f64, f64, f64) = (start.parse()?, stop.parse()?, step.parse()?);
        if !(step > 0.0) || !start.is_finite() || !stop.is_finite() {
            bail!("range needs finite bounds and a positive step, got {s:?}");
        }
        if stop < start {
            return Ok(Vec::new());
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        if count > 100_000 {
            bail!("range {s:?} has too many points");
        }
        return Ok((0..count).map(|i| tidy(start + i as f64 * step)).collect());
    }
    s.split(',')
        .map(|p| {
            let v: f64 = p.trim().parse().with_context(|| format!("cannot parse {p:?}"))?;
            if !v.is_finite() {
                bail!("non-finite value {p:?}");
            }
            Ok(v)
        })
        .collect()
}

/// Rounds away accumulated range error, so `0.1*3` prints as `0.3`.
fn tidy(v: f64) -> f64 {
    let r = (v * 1e12).round() / 1e12;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}
