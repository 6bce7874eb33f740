//! On-disk cache of iTEBD ground states.

use std::fs;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use gqd_core::itebd::{ground_state, read_checkpoint, write_checkpoint, CanonicalUnitCell, CheckpointMeta, TrotterSchedule};
use gqd_core::models::{xxz_term, XxzParams};
use log::{info, warn};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CacheStatus {
    Hit,
    Miss,
    Disabled,
}

pub struct CachedGroundState {
    pub state: CanonicalUnitCell,
    pub energy: f64,
    pub status: CacheStatus,
    pub key: String,
}

pub fn schedule_hash(schedule: &TrotterSchedule) -> String {
    hex::encode(Sha256::digest(schedule.describe()))
}

/// Key over model, parameters (bit patterns), bond dimension, schedule and seed.
pub fn cache_key(model: &str, params: &[f64], d: usize, schedule: &TrotterSchedule, seed: u64) -> String {
    let mut hasher = Sha256::new();
    hasher.update(format!("model={model};"));
    for p in params {
        hasher.update(format!("p={:016x};", p.to_bits()));
    }
    hasher.update(format!("D={d};schedule={};seed={seed}", schedule.describe()));
    hex::encode(hasher.finalize())
}

pub fn checkpoint_path(dir: &Path, key: &str) -> PathBuf {
    dir.join(format!("{key}.itebd"))
}

/// XXZ ground state, read from `dir` when a matching checkpoint exists.
pub fn xxz_ground_state(
    delta: f64,
    d: usize,
    schedule: &TrotterSchedule,
    seed: u64,
    dir: Option<&Path>,
) -> Result<CachedGroundState> {
    let key = cache_key("xxz", &[delta], d, schedule, seed);
    let meta = CheckpointMeta {
        model: "xxz".into(),
        params: vec![delta],
        bond_dimension: d,
        seed,
        schedule_hash: schedule_hash(schedule),
        energy: 0.0,
    };
    if let Some(dir) = dir {
        let path = checkpoint_path(dir, &key);
        if path.exists() {
            match load(&path) {
                Ok((state, found)) if same_run(&found, &meta) => {
                    info!("cache hit for xxz delta={delta} ({})", path.display());
                    return Ok(CachedGroundState {
                        state,
                        energy: found.energy,
                        status: CacheStatus::Hit,
                        key,
                    });
                }
                Ok(_) => warn!("checkpoint {} does not match its key; recomputing", path.display()),
                Err(e) => warn!("unreadable checkpoint {}: {e:#}; recomputing", path.display()),
            }
        }
    }
    let gs = ground_state(&xxz_term(XxzParams { delta }), d, schedule, seed)
        .with_context(|| format!("iTEBD for xxz delta={delta}"))?;
    let status = match dir {
        Some(dir) => {
            let meta = CheckpointMeta {
                energy: gs.energy,
                ..meta
            };
            store(dir, &key, &gs.state, &meta)?;
            CacheStatus::Miss
        }
        None => CacheStatus::Disabled,
    };
    Ok(CachedGroundState {
        state: gs.state,
        energy: gs.energy,
        status,
        key,
    })
}

fn same_run(a: &CheckpointMeta, b: &CheckpointMeta) -> bool {
    a.model == b.model
        && a.params.len() == b.params.len()
        && a.params.iter().zip(&b.params).all(|(x, y)| x.to_bits() == y.to_bits())
        && a.bond_dimension == b.bond_dimension
        && a.seed == b.seed
        && a.schedule_hash == b.schedule_hash
}

fn load(path: &Path) -> Result<(CanonicalUnitCell, CheckpointMeta)> {
    let file = fs::File::open(path)?;
    Ok(read_checkpoint(BufReader::new(file))?)
}

fn store(dir: &Path, key: &str, state: &CanonicalUnitCell, meta: &CheckpointMeta) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = checkpoint_path(dir, key);
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    {
        let mut out = BufWriter::new(fs::File::create(&tmp)?);
        write_checkpoint(state, meta, &mut out)?;
        std::io::Write::flush(&mut out)?;
    }
    fs::rename(&tmp, &path)?;
    Ok(())
}
