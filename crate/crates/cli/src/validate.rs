//! Oracle-equivalence checks: the fast MPS pipeline against dense
//! reference implementations.

use std::f64::consts::PI;

use anyhow::Result;
use gqd_core::discord::{channel_matrices, measured_block_diagonals, minimize_gqd, minimize_gqd_dense, GqdConfig, RotationAngles};
use gqd_core::itebd::{ground_state, to_uniform_mps, TrotterSchedule};
use gqd_core::models::{three_body_mps, xxz_term, xy_block_rdm, xy_majorana_correlations, ThreeBodyParams, XxzParams, XyParams};
use gqd_core::mps::{EigenOptions, InfiniteMps};
use gqd_core::oracle::{brute_force_gqd, dense_measured_diagonals};
use gqd_core::rdm::block_rdm;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub instances: usize,
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn new(name: &str, errors: &[f64], tolerance: f64) -> Self {
        let max_error = errors.iter().copied().fold(0.0, f64::max);
        Self {
            name: name.into(),
            instances: errors.len(),
            max_error,
            tolerance,
            passed: errors.iter().all(|e| *e <= tolerance),
        }
    }
}

pub struct ValidateOptions {
    pub seed: u64,
    pub max_n: usize,
    pub include_itebd: bool,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self {
            seed: 2024,
            max_n: 6,
            include_itebd: true,
        }
    }
}

pub fn run_validation(opts: &ValidateOptions) -> Result<Vec<Check>> {
    let config = GqdConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut checks = Vec::new();

    let mut diag_errors = Vec::new();
    for g in [-1.0, -0.3, 0.5, 1.0] {
        let mps = three_body_mps(ThreeBodyParams { g })?;
        for n in 2..=opts.max_n {
            let rho = block_rdm(&mps.tensors, &mps.fixed_point, n)?;
            for _ in 0..20 {
                let angles = RotationAngles::new(rng.random_range(0.0..=PI), rng.random_range(0.0..2.0 * PI))?;
                let fast = measured_block_diagonals(&channel_matrices(&mps.tensors, &angles), &mps, n)?;
                let dense = dense_measured_diagonals(&rho, &angles)?;
                diag_errors.push(fast.iter().zip(&dense).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
            }
        }
    }
    checks.push(Check::new("measured diagonals, three-body model", &diag_errors, 1e-10));

    let mut errors = Vec::new();
    for g in [-1.0, -0.5, 0.5] {
        let mps = three_body_mps(ThreeBodyParams { g })?;
        for n in 2..=opts.max_n {
            let rho = block_rdm(&mps.tensors, &mps.fixed_point, n)?;
            errors.push((minimize_gqd(&mps, n, &config)?.value - brute_force_gqd(&rho, &config)?.value).abs());
        }
    }
    checks.push(Check::new("discord, three-body model", &errors, 2e-6));

    let mut errors = Vec::new();
    for (gamma, h) in [(1.0, 0.8), (0.5, 0.5)] {
        for n in 2..=opts.max_n.min(6) {
            let rho = xy_block_rdm(&xy_majorana_correlations(XyParams { gamma, field_h: h }, n)?)?;
            errors.push((minimize_gqd_dense(&rho, &config)?.value - brute_force_gqd(&rho, &config)?.value).abs());
        }
    }
    checks.push(Check::new("discord, XY chain", &errors, 2e-6));

    if opts.include_itebd {
        let gs = ground_state(&xxz_term(XxzParams { delta: 1.5 }), 8, &TrotterSchedule::default(), opts.seed)?;
        let mps = InfiniteMps::new(&to_uniform_mps(&gs.state)?, &EigenOptions::default())?;
        let mut errors = Vec::new();
        for n in 2..=opts.max_n.min(5) {
            let rho = block_rdm(&mps.tensors, &mps.fixed_point, n)?;
            errors.push((minimize_gqd(&mps, n, &config)?.value - brute_force_gqd(&rho, &config)?.value).abs());
        }
        checks.push(Check::new("discord, XXZ chain (iTEBD D=8)", &errors, 2e-6));
    }
    Ok(checks)
}
