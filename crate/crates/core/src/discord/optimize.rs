//! Minimisation of the discord over measurement bases: a coarse `(θ, φ)`
//! grid evaluated in parallel, then Nelder-Mead from the best cells.

use std::f64::consts::{PI, TAU};

use log::debug;
use rayon::prelude::*;

use crate::discord::entropy::TruncationOptions;
use crate::discord::objective::{DenseDiscordState, DiscordState, EntropyMethod, GqdTerms, MpsDiscordState};
use crate::discord::rotation::{rotation_matrix, RotationAngles};
use crate::mps::InfiniteMps;
use crate::rdm::ReducedDensityMatrix;
use crate::{GqdError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GqdConfig {
    /// Grid points in `θ`, including both ends of `[0, π]`.
    pub grid_theta: usize,
    /// Grid points in `φ` over `[0, 2π)`.
    pub grid_phi: usize,
    /// Number of best grid cells used as simplex starts.
    pub starts: usize,
    pub max_iter: usize,
    /// Simplex size below which refinement stops.
    pub xtol: f64,
    /// Spread of simplex values below which refinement stops.
    pub ftol: f64,
    /// Follow the shared-angle optimum with a per-site refinement.
    pub per_site: bool,
    pub per_site_max_iter: usize,
    /// Blocks up to this size use the dense block entropy.
    pub dense_cap: usize,
    pub truncation: TruncationOptions,
    /// Raw minima in `[−clip_tolerance, 0)` are reported as zero.
    pub clip_tolerance: f64,
}

impl Default for GqdConfig {
    fn default() -> Self {
        Self {
            grid_theta: 25,
            grid_phi: 25,
            starts: 3,
            max_iter: 500,
            xtol: 1e-9,
            ftol: 1e-14,
            per_site: false,
            per_site_max_iter: 4000,
            dense_cap: 10,
            truncation: TruncationOptions::default(),
            clip_tolerance: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub stage: String,
    pub iteration: usize,
    pub value: f64,
    pub params: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerSiteResult {
    pub value: f64,
    pub raw_value: f64,
    pub angles: RotationAngles,
    pub terms: GqdTerms,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GqdResult {
    /// Minimised discord in bits, clipped at zero within tolerance.
    pub value: f64,
    pub raw_value: f64,
    pub angles: RotationAngles,
    pub terms: GqdTerms,
    pub optimizer_trace: Vec<TraceEntry>,
    /// False when a simplex run hit `max_iter`.
    pub converged: bool,
    pub warnings: Vec<String>,
    pub entropy_method: EntropyMethod,
    pub per_site: Option<PerSiteResult>,
}

/// Discord of the `n`-site block of an infinite MPS.
pub fn minimize_gqd(mps: &InfiniteMps, n: usize, config: &GqdConfig) -> Result<GqdResult> {
    let state = MpsDiscordState::auto(mps, n, config.dense_cap, &config.truncation)?;
    minimize_state(&state, config)
}

/// Discord of an explicit block state.
pub fn minimize_gqd_dense(rho: &ReducedDensityMatrix, config: &GqdConfig) -> Result<GqdResult> {
    minimize_state(&DenseDiscordState::new(rho)?, config)
}

pub fn minimize_state(state: &dyn DiscordState, config: &GqdConfig) -> Result<GqdResult> {
    if config.grid_theta < 2 || config.grid_phi < 1 || config.starts == 0 {
        return Err(GqdError::InvalidArgument(
            "grid needs at least 2 θ points, 1 φ point and one start".into(),
        ));
    }
    let n = state.n_sites();
    let shared = |x: &[f64]| -> Result<f64> {
        let r = rotation_matrix(x[0], x[1]);
        let (site, block) = state.measured_entropies(&vec![r; n])?;
        Ok(block - site)
    };

    let (nt, np) = (config.grid_theta, config.grid_phi);
    let cells: Vec<(usize, usize)> = (0..nt).flat_map(|i| (0..np).map(move |j| (i, j))).collect();
    let point = |i: usize, j: usize| [PI * i as f64 / (nt - 1) as f64, TAU * j as f64 / np as f64];
    let values = cells
        .par_iter()
        .map(|&(i, j)| shared(&point(i, j)))
        .collect::<Result<Vec<f64>>>()?;

    let mut order: Vec<usize> = (0..cells.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(cells[a].cmp(&cells[b])));

    let mut trace = Vec::new();
    let step = [0.5 * PI / (nt - 1) as f64, 0.5 * TAU / np as f64];
    let mut best: Option<Simplex> = None;
    let mut converged = true;
    for (s, &idx) in order.iter().take(config.starts).enumerate() {
        let (i, j) = cells[idx];
        let start = point(i, j);
        trace.push(TraceEntry {
            stage: format!("grid[{i},{j}]"),
            iteration: 0,
            value: values[idx],
            params: start.to_vec(),
        });
        let run = nelder_mead(&shared, &start, &step, config.max_iter, config.xtol, config.ftol)?;
        converged &= run.converged;
        trace.extend(run.history.iter().map(|(it, v, x)| TraceEntry {
            stage: format!("simplex{s}"),
            iteration: *it,
            value: *v,
            params: x.clone(),
        }));
        if best.as_ref().is_none_or(|b| run.value < b.value) {
            best = Some(run);
        }
    }
    let best = best.expect("at least one start");
    let angles = RotationAngles::canonical(best.x[0], best.x[1]);
    let terms = state.terms(&vec![rotation_matrix(angles.theta, angles.phi); n])?;
    let mut warnings = state.warnings();
    let raw_value = terms.value();
    let value = clip_value(raw_value, config.clip_tolerance, &mut warnings);
    if !converged {
        warnings.push(format!("simplex refinement hit max_iter={}", config.max_iter));
    }

    let per_site = if config.per_site && n > 1 {
        Some(per_site_refinement(state, &angles, config, &mut warnings, &mut trace)?)
    } else {
        None
    };
    debug!("GQD n={n}: {value:.12} at θ={:.6}, φ={:.6}", angles.theta, angles.phi);

    Ok(GqdResult {
        value,
        raw_value,
        angles,
        terms,
        optimizer_trace: trace,
        converged,
        warnings,
        entropy_method: state.entropy_method(),
        per_site,
    })
}

fn clip_value(raw: f64, tolerance: f64, warnings: &mut Vec<String>) -> f64 {
    if raw >= 0.0 {
        raw
    } else if raw >= -tolerance {
        0.0
    } else {
        warnings.push(format!("negative discord {raw:.3e} beyond clipping tolerance"));
        raw
    }
}

fn per_site_refinement(
    state: &dyn DiscordState,
    shared: &RotationAngles,
    config: &GqdConfig,
    warnings: &mut Vec<String>,
    trace: &mut Vec<TraceEntry>,
) -> Result<PerSiteResult> {
    let n = state.n_sites();
    let objective = |x: &[f64]| -> Result<f64> {
        let rotations: Vec<_> = x.chunks(2).map(|p| rotation_matrix(p[0], p[1])).collect();
        let (site, block) = state.measured_entropies(&rotations)?;
        Ok(block - site)
    };
    let start: Vec<f64> = (0..n).flat_map(|_| [shared.theta, shared.phi]).collect();
    let step = vec![0.05; 2 * n];
    let run = nelder_mead(&objective, &start, &step, config.per_site_max_iter, config.xtol, config.ftol)?;
    trace.extend(run.history.iter().map(|(it, v, x)| TraceEntry {
        stage: "per_site".into(),
        iteration: *it,
        value: *v,
        params: x.clone(),
    }));
    let pairs: Vec<(f64, f64)> = run.x.chunks(2).map(|p| (p[0], p[1])).collect();
    let angles = RotationAngles::canonical(shared.theta, shared.phi).with_per_site(pairs);
    let terms = state.terms(&angles.rotations(n)?)?;
    let raw_value = terms.value();
    Ok(PerSiteResult {
        value: clip_value(raw_value, config.clip_tolerance, warnings),
        raw_value,
        angles,
        terms,
        converged: run.converged,
    })
}

#[derive(Debug, Clone)]
struct Simplex {
    x: Vec<f64>,
    value: f64,
    converged: bool,
    history: Vec<(usize, f64, Vec<f64>)>,
}

/// Standard Nelder-Mead with reflection 1, expansion 2, contraction and
/// shrink 1/2.
fn nelder_mead<F>(f: &F, x0: &[f64], step: &[f64], max_iter: usize, xtol: f64, ftol: f64) -> Result<Simplex>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let dim = x0.len();
    let mut pts: Vec<Vec<f64>> = vec![x0.to_vec()];
    for k in 0..dim {
        let mut p = x0.to_vec();
        p[k] += step[k];
        pts.push(p);
    }
    let mut vals = pts.iter().map(|p| f(p)).collect::<Result<Vec<f64>>>()?;
    let mut history = Vec::new();
    let mut converged = false;

    let blend = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect() };

    for iter in 0..max_iter {
        let mut idx: Vec<usize> = (0..=dim).collect();
        idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]).then(a.cmp(&b)));
        pts = idx.iter().map(|&i| pts[i].clone()).collect();
        vals = idx.iter().map(|&i| vals[i]).collect();
        history.push((iter, vals[0], pts[0].clone()));

        let spread_f = vals[dim] - vals[0];
        let spread_x = pts[1..]
            .iter()
            .flat_map(|p| p.iter().zip(&pts[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if spread_x <= xtol || spread_f <= ftol {
            converged = true;
            break;
        }

        let centroid: Vec<f64> = (0..dim)
            .map(|k| pts[..dim].iter().map(|p| p[k]).sum::<f64>() / dim as f64)
            .collect();
        let worst = pts[dim].clone();
        let reflected = blend(&centroid, &worst, -1.0);
        let fr = f(&reflected)?;
        if fr < vals[0] {
            let expanded = blend(&centroid, &worst, -2.0);
            let fe = f(&expanded)?;
            if fe < fr {
                pts[dim] = expanded;
                vals[dim] = fe;
            } else {
                pts[dim] = reflected;
                vals[dim] = fr;
            }
            continue;
        }
        if fr < vals[dim - 1] {
            pts[dim] = reflected;
            vals[dim] = fr;
            continue;
        }
        let (contracted, fc) = if fr < vals[dim] {
            let c = blend(&centroid, &reflected, 0.5);
            let fc = f(&c)?;
            (c, fc)
        } else {
            let c = blend(&centroid, &worst, 0.5);
            let fc = f(&c)?;
            (c, fc)
        };
        if fc < vals[dim].min(fr) {
            pts[dim] = contracted;
            vals[dim] = fc;
            continue;
        }
        for k in 1..=dim {
            pts[k] = blend(&pts[0], &pts[k], 0.5);
            vals[k] = f(&pts[k])?;
        }
    }
    let best = (0..=dim)
        .min_by(|&a, &b| vals[a].total_cmp(&vals[b]).then(a.cmp(&b)))
        .expect("non-empty simplex");
    Ok(Simplex {
        x: pts[best].clone(),
        value: vals[best],
        converged,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_finds_quadratic_minimum() {
        let f = |x: &[f64]| -> Result<f64> { Ok((x[0] - 1.0).powi(2) + 3.0 * (x[1] + 0.5).powi(2) + 2.0) };
        let run = nelder_mead(&f, &[0.0, 0.0], &[0.3, 0.3], 1000, 1e-10, 0.0).unwrap();
        assert!(run.converged);
        assert!((run.x[0] - 1.0).abs() < 1e-6 && (run.x[1] + 0.5).abs() < 1e-6);
        assert!((run.value - 2.0).abs() < 1e-14);
    }

    #[test]
    fn simplex_reports_exhausted_budget() {
        let f = |x: &[f64]| -> Result<f64> { Ok(x[0].powi(2) + x[1].powi(2)) };
        let run = nelder_mead(&f, &[5.0, 5.0], &[0.1, 0.1], 3, 1e-12, 0.0).unwrap();
        assert!(!run.converged);
    }

    #[test]
    fn clipping() {
        let mut w = Vec::new();
        assert_eq!(clip_value(-1e-10, 1e-8, &mut w), 0.0);
        assert!(w.is_empty());
        assert_eq!(clip_value(-1e-6, 1e-8, &mut w), -1e-6);
        assert_eq!(w.len(), 1);
    }
}
