//! Parameter sweeps: discord tables, fits, plots and a run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use gqd_core::discord::{minimize_gqd, minimize_gqd_dense, GqdResult};
use gqd_core::itebd::to_uniform_mps;
use gqd_core::models::{three_body_mps, xy_block_rdm, xy_majorana_correlations, ThreeBodyParams, XyParams};
use gqd_core::mps::{EigenOptions, InfiniteMps};
use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;

use crate::cache::{schedule_hash, xxz_ground_state, CacheStatus};
use crate::config::{Model, SweepConfig};
use crate::fit::{fit_linear_growth, LinearFit};
use crate::plot::{line_plot, Series};

pub const CSV_HEADER: [&str; 11] = [
    "model",
    "coupling",
    "field",
    "n",
    "G_n",
    "G_n_per_site",
    "k_n",
    "optimizer_theta",
    "optimizer_phi",
    "entropy_method",
    "warnings",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub model: Model,
    pub coupling: f64,
    pub field: Option<f64>,
    pub n: usize,
    pub g_n: f64,
    pub g_n_per_site: f64,
    /// `G_n − G_{n−1}`, absent when the smaller block is not in the table.
    pub k_n: Option<f64>,
    pub theta: f64,
    pub phi: f64,
    pub entropy_method: String,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FailureRecord {
    pub n: Option<usize>,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RowRecord {
    pub n: usize,
    /// One-based data row in `results.csv`.
    pub csv_row: usize,
    pub seconds: f64,
    pub converged: bool,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PointRecord {
    pub index: usize,
    pub coupling: f64,
    pub field: Option<f64>,
    pub seed: Option<u64>,
    pub cache: Option<CacheStatus>,
    pub cache_key: Option<String>,
    pub ground_state_energy: Option<f64>,
    pub ground_state_seconds: Option<f64>,
    pub rows: Vec<RowRecord>,
    pub failures: Vec<FailureRecord>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitRecord {
    pub coupling: f64,
    pub field: Option<f64>,
    #[serde(flatten)]
    pub fit: LinearFit,
}

#[derive(Debug, Clone, Serialize)]
pub struct EngineVersions {
    pub gqd_core: String,
    pub gqd_cli: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub config: BTreeMap<String, String>,
    pub model: Model,
    pub engine: EngineVersions,
    pub threads: usize,
    pub seed: u64,
    pub bond_dimension: Option<usize>,
    pub schedule: Option<String>,
    pub schedule_hash: Option<String>,
    pub points: Vec<PointRecord>,
    pub fits: Vec<FitRecord>,
    pub notes: Vec<String>,
    pub cache_hits: usize,
    pub failures: usize,
    pub outputs: Vec<String>,
    pub total_seconds: f64,
}

pub struct SweepOutput {
    pub rows: Vec<Row>,
    pub manifest: RunManifest,
    pub directory: PathBuf,
}

struct PointOutcome {
    record: PointRecord,
    rows: Vec<Row>,
}

/// Runs every grid point, then writes `results.csv`, `fits.csv`,
/// `manifest.json` and SVG plots under `out_dir`.
pub fn run_sweep(config: &SweepConfig, out_dir: &Path) -> Result<SweepOutput> {
    let start = Instant::now();
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let cache_dir = config
        .cache
        .then(|| config.cache_dir.clone().unwrap_or_else(|| out_dir.join("cache")));
    let points = config.points();
    info!("sweep over {} points, n = {}..={}", points.len(), config.n_min, config.n_max);

    let outcomes: Vec<PointOutcome> = points
        .par_iter()
        .enumerate()
        .map(|(index, &(coupling, field))| run_point(config, index, coupling, field, cache_dir.as_deref()))
        .collect();

    let mut rows = Vec::new();
    let mut records = Vec::new();
    for mut outcome in outcomes {
        for (row, rec) in outcome.rows.iter().zip(outcome.record.rows.iter_mut()) {
            debug_assert_eq!(row.n, rec.n);
            rows.push(row.clone());
            rec.csv_row = rows.len();
        }
        records.push(outcome.record);
    }

    let mut notes = Vec::new();
    let mut fits = Vec::new();
    for rec in &records {
        let series: Vec<(usize, f64)> = rows
            .iter()
            .filter(|r| r.coupling.to_bits() == rec.coupling.to_bits() && r.field.map(f64::to_bits) == rec.field.map(f64::to_bits))
            .map(|r| (r.n, r.g_n))
            .collect();
        if series.len() < 4 {
            continue;
        }
        match fit_linear_growth(&series, config.fit_window) {
            Ok(fit) => fits.push(FitRecord {
                coupling: rec.coupling,
                field: rec.field,
                fit,
            }),
            Err(e) => notes.push(format!("point {}: no fit ({e})", rec.index)),
        }
    }

    let mut outputs = Vec::new();
    write_results_csv(&out_dir.join("results.csv"), &rows)?;
    outputs.push("results.csv".to_string());
    write_fits_csv(&out_dir.join("fits.csv"), config.model, &fits)?;
    outputs.push("fits.csv".to_string());
    for (name, svg) in plots(config, &rows) {
        fs::write(out_dir.join(&name), svg)?;
        outputs.push(name);
    }
    outputs.push("manifest.json".to_string());

    let failures = records.iter().map(|r| r.failures.len()).sum();
    let xxz = config.model == Model::Xxz;
    let manifest = RunManifest {
        config_hash: config.hash(),
        config: config.entries.clone(),
        model: config.model,
        engine: EngineVersions {
            gqd_core: gqd_core::VERSION.to_string(),
            gqd_cli: env!("CARGO_PKG_VERSION").to_string(),
        },
        threads: rayon::current_num_threads(),
        seed: config.seed,
        bond_dimension: xxz.then_some(config.bond_dimension),
        schedule: xxz.then(|| config.schedule.describe()),
        schedule_hash: xxz.then(|| schedule_hash(&config.schedule)),
        cache_hits: records.iter().filter(|r| r.cache == Some(CacheStatus::Hit)).count(),
        points: records,
        fits,
        notes,
        failures,
        outputs,
        total_seconds: start.elapsed().as_secs_f64(),
    };
    let file = fs::File::create(out_dir.join("manifest.json"))?;
    serde_json::to_writer_pretty(std::io::BufWriter::new(file), &manifest)?;
    Ok(SweepOutput {
        rows,
        manifest,
        directory: out_dir.to_path_buf(),
    })
}

enum Engine {
    Mps(InfiniteMps),
    Xy(XyParams),
}

fn run_point(config: &SweepConfig, index: usize, coupling: f64, field: Option<f64>, cache_dir: Option<&Path>) -> PointOutcome {
    let mut record = PointRecord {
        index,
        coupling,
        field,
        seed: None,
        cache: None,
        cache_key: None,
        ground_state_energy: None,
        ground_state_seconds: None,
        rows: Vec::new(),
        failures: Vec::new(),
    };
    let engine = match config.model {
        Model::ThreeBody => three_body_mps(ThreeBodyParams { g: coupling }).map(Engine::Mps).map_err(anyhow::Error::from),
        Model::Xy => Ok(Engine::Xy(XyParams {
            gamma: coupling,
            field_h: field.expect("xy points carry a field"),
        })),
        Model::Xxz => {
            let t = Instant::now();
            record.seed = Some(config.seed);
            xxz_ground_state(coupling, config.bond_dimension, &config.schedule, config.seed, cache_dir).and_then(|gs| {
                record.cache = Some(gs.status);
                record.cache_key = Some(gs.key);
                record.ground_state_energy = Some(gs.energy);
                record.ground_state_seconds = Some(t.elapsed().as_secs_f64());
                let tensors = to_uniform_mps(&gs.state)?;
                Ok(Engine::Mps(InfiniteMps::new(&tensors, &EigenOptions::default())?))
            })
        }
    };
    let engine = match engine {
        Ok(e) => e,
        Err(e) => {
            warn!("point {index} ({coupling}, {field:?}) failed: {e:#}");
            record.failures.push(FailureRecord {
                n: None,
                message: format!("{e:#}"),
            });
            return PointOutcome { record, rows: Vec::new() };
        }
    };

    let results: Vec<(usize, f64, Result<GqdResult>)> = (config.n_min..=config.n_max)
        .into_par_iter()
        .map(|n| {
            let t = Instant::now();
            let r = match &engine {
                Engine::Mps(mps) => minimize_gqd(mps, n, &config.gqd).map_err(anyhow::Error::from),
                Engine::Xy(params) => xy_majorana_correlations(*params, n)
                    .and_then(|c| xy_block_rdm(&c))
                    .and_then(|rho| minimize_gqd_dense(&rho, &config.gqd))
                    .map_err(anyhow::Error::from),
            };
            (n, t.elapsed().as_secs_f64(), r)
        })
        .collect();

    let mut rows: Vec<Row> = Vec::new();
    for (n, seconds, result) in results {
        match result {
            Ok(r) => {
                let mut warnings = r.warnings.clone();
                if !r.converged {
                    warnings.push("optimizer hit its iteration limit".into());
                }
                let k_n = rows.last().filter(|p| p.n + 1 == n).map(|p| r.value - p.g_n);
                record.rows.push(RowRecord {
                    n,
                    csv_row: 0,
                    seconds,
                    converged: r.converged,
                    warnings: warnings.clone(),
                });
                rows.push(Row {
                    model: config.model,
                    coupling,
                    field,
                    n,
                    g_n: r.value,
                    g_n_per_site: r.value / n as f64,
                    k_n,
                    theta: r.angles.theta,
                    phi: r.angles.phi,
                    entropy_method: r.entropy_method.to_string(),
                    warnings,
                });
            }
            Err(e) => {
                warn!("point {index} n={n} failed: {e:#}");
                record.failures.push(FailureRecord {
                    n: Some(n),
                    message: format!("{e:#}"),
                });
            }
        }
    }
    PointOutcome { record, rows }
}

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_results_csv(path: &Path, rows: &[Row]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.model.to_string(),
            fmt17(r.coupling),
            r.field.map(fmt17).unwrap_or_default(),
            r.n.to_string(),
            fmt17(r.g_n),
            fmt17(r.g_n_per_site),
            r.k_n.map(fmt17).unwrap_or_default(),
            fmt17(r.theta),
            fmt17(r.phi),
            r.entropy_method.clone(),
            r.warnings.join("; "),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn write_fits_csv(path: &Path, model: Model, fits: &[FitRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["model", "coupling", "field", "k", "b", "max_residual", "n_lo", "n_hi"])?;
    for f in fits {
        w.write_record([
            model.to_string(),
            fmt17(f.coupling),
            f.field.map(fmt17).unwrap_or_default(),
            fmt17(f.fit.k),
            fmt17(f.fit.b),
            fmt17(f.fit.residual),
            f.fit.n_lo.to_string(),
            f.fit.n_hi.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn plots(config: &SweepConfig, rows: &[Row]) -> Vec<(String, String)> {
    let (param, x_label) = match config.model {
        Model::ThreeBody => ("g", "g"),
        Model::Xxz => ("Δ", "Δ"),
        Model::Xy => ("γ", "h"),
    };
    let xy = config.model == Model::Xy;
    let point_label = |r: &Row| match r.field {
        Some(h) if !xy || config.field.len() == 1 => format!("{param}={}, h={h}", r.coupling),
        _ => format!("{param}={}", r.coupling),
    };
    let x_of = |r: &Row| if xy { r.field.unwrap_or(f64::NAN) } else { r.coupling };

    // Curves over the parameter, one per (n, and γ for XY).
    let by_n = |value: fn(&Row) -> f64| {
        let mut series: Vec<Series> = Vec::new();
        let mut keys: Vec<(usize, u64)> = Vec::new();
        for r in rows {
            let key = (r.n, if xy { r.coupling.to_bits() } else { 0 });
            let i = match keys.iter().position(|k| *k == key) {
                Some(i) => i,
                None => {
                    keys.push(key);
                    let label = if xy && config.coupling.len() > 1 {
                        format!("n={}, γ={}", r.n, r.coupling)
                    } else {
                        format!("n={}", r.n)
                    };
                    series.push(Series { label, points: Vec::new() });
                    keys.len() - 1
                }
            };
            series[i].points.push((x_of(r), value(r)));
        }
        series
    };
    // Curves over n, one per parameter point.
    let by_point = |value: fn(&Row) -> Option<f64>| {
        let mut series: Vec<Series> = Vec::new();
        let mut keys: Vec<(u64, Option<u64>)> = Vec::new();
        for r in rows {
            let Some(v) = value(r) else { continue };
            let key = (r.coupling.to_bits(), r.field.map(f64::to_bits));
            let i = match keys.iter().position(|k| *k == key) {
                Some(i) => i,
                None => {
                    keys.push(key);
                    series.push(Series {
                        label: point_label(r),
                        points: Vec::new(),
                    });
                    keys.len() - 1
                }
            };
            series[i].points.push((r.n as f64, v));
        }
        series
    };
    let model = config.model;
    vec![
        (
            "g_n.svg".into(),
            line_plot(&format!("{model}: G_n"), x_label, "G_n", &by_n(|r| r.g_n)),
        ),
        (
            "g_n_per_site.svg".into(),
            line_plot(&format!("{model}: G_n / n"), x_label, "G_n / n", &by_n(|r| r.g_n_per_site)),
        ),
        (
            "g_vs_n.svg".into(),
            line_plot(&format!("{model}: G_n against n"), "n", "G_n", &by_point(|r| Some(r.g_n))),
        ),
        (
            "k_n.svg".into(),
            line_plot(&format!("{model}: k = G_n − G_(n−1)"), "n", "k", &by_point(|r| r.k_n)),
        ),
    ]
}

/// Evaluates the first grid point of `config` without writing any files.
/// Any failure is returned as an error.
pub fn evaluate_point(config: &SweepConfig, cache_dir: Option<&Path>) -> Result<(PointRecord, Vec<Row>)> {
    let &(coupling, field) = config
        .points()
        .first()
        .ok_or_else(|| anyhow::anyhow!("empty parameter grid"))?;
    let outcome = run_point(config, 0, coupling, field, cache_dir);
    if let Some(f) = outcome.record.failures.first() {
        anyhow::bail!("{}", f.message);
    }
    Ok((outcome.record, outcome.rows))
}
