//! Exact block states of the infinite XY chain from Majorana two-point
//! functions.
//!
//! With `x_j = (Π_{l<j} σ^z_l) σ^x_j` and `y_j = (Π_{l<j} σ^z_l) σ^y_j` the
//! ground state is Gaussian: `⟨x_l x_m⟩ = ⟨y_l y_m⟩ = δ_{lm}` and
//! `⟨x_l y_m⟩ = i G_{m−l}` with
//!
//! ```text
//! G_r = (1/π) ∫_0^π [cos(kr)(h − cos k) + γ sin(kr) sin k] / ω_k dk,
//! ω_k = √((h − cos k)² + γ² sin² k).
//! ```
//!
//! Every Pauli string on the block is a Majorana monomial, whose expectation
//! is a Pfaffian of the correlation submatrix.

use log::debug;
use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::models::pfaffian::pfaffian;
use crate::models::quadrature::GaussLegendre;
use crate::models::spin_chains::XyParams;
use crate::pauli::pauli;
use crate::rdm::{validate_rdm, ReducedDensityMatrix};
use crate::{CMat, GqdError, Result, C64};

/// Default largest block.
pub const XY_SITE_CAP: usize = 7;
const START_NODES: usize = 2048;
const MAX_NODES: usize = 1 << 17;
const QUADRATURE_TOL: f64 = 1e-10;

/// Real antisymmetric `Γ` with `⟨w_a w_b⟩ = δ_{ab} + i Γ_{ab}` for the
/// ordering `w = (x₀, y₀, x₁, y₁, …)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MajoranaCorrelations {
    pub n_sites: usize,
    pub matrix: DMatrix<f64>,
}

/// `G_r` for `r = −max_r, …, max_r` (index `r + max_r`).
pub fn xy_correlators(params: XyParams, max_r: usize) -> Result<Vec<f64>> {
    let XyParams { gamma, field_h: h } = params;
    let mut breaks = vec![0.0];
    if h.abs() < 1.0 {
        breaks.push(h.acos());
    }
    breaks.push(std::f64::consts::PI);

    let eval = |nodes: usize| -> Vec<f64> {
        let rule = GaussLegendre::new(nodes);
        let mut out = vec![0.0; 2 * max_r + 1];
        for seg in breaks.windows(2) {
            let (ks, ws) = rule.mapped(seg[0], seg[1]);
            for (&k, &w) in ks.iter().zip(&ws) {
                let (s, c) = k.sin_cos();
                let omega = ((h - c).powi(2) + (gamma * s).powi(2)).sqrt();
                if omega == 0.0 {
                    continue;
                }
                for (idx, slot) in out.iter_mut().enumerate() {
                    let r = idx as f64 - max_r as f64;
                    let (sr, cr) = (k * r).sin_cos();
                    *slot += w * (cr * (h - c) + gamma * sr * s) / omega;
                }
            }
        }
        out.iter().map(|v| v / std::f64::consts::PI).collect()
    };

    let mut nodes = START_NODES;
    let mut prev = eval(nodes);
    loop {
        let next_nodes = 2 * nodes;
        let next = eval(next_nodes);
        let change = prev.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if change < QUADRATURE_TOL {
            return Ok(next);
        }
        if next_nodes >= MAX_NODES {
            return Err(GqdError::Quadrature {
                change,
                nodes: next_nodes,
            });
        }
        debug!("XY correlators: change {change:.2e} at {next_nodes} nodes, refining");
        nodes = next_nodes;
        prev = next;
    }
}

pub fn xy_majorana_correlations(params: XyParams, n: usize) -> Result<MajoranaCorrelations> {
    xy_majorana_correlations_with_cap(params, n, XY_SITE_CAP)
}

pub fn xy_majorana_correlations_with_cap(params: XyParams, n: usize, cap: usize) -> Result<MajoranaCorrelations> {
    if n == 0 {
        return Err(GqdError::InvalidArgument("block must contain at least one site".into()));
    }
    if n > cap {
        return Err(GqdError::CapacityExceeded {
            what: "XY block sites",
            requested: n,
            cap,
        });
    }
    let g = xy_correlators(params, n - 1)?;
    let off = n - 1;
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for l in 0..n {
        for mm in 0..n {
            let v = g[mm + off - l];
            m[(2 * l, 2 * mm + 1)] = v;
            m[(2 * mm + 1, 2 * l)] = -v;
        }
    }
    Ok(MajoranaCorrelations { n_sites: n, matrix: m })
}

/// `⟨P_0 ⊗ P_1 ⊗ ⋯⟩` for Pauli indices (0 = I, 1 = X, 2 = Y, 3 = Z).
pub fn pauli_expectation(corr: &MajoranaCorrelations, string: &[usize]) -> Result<f64> {
    if string.len() != corr.n_sites {
        return Err(GqdError::Dimension(format!(
            "Pauli string of length {} on {} sites",
            string.len(),
            corr.n_sites
        )));
    }
    let mut mask: u64 = 0;
    let mut phase: u32 = 0;
    let push = |mask: &mut u64, phase: &mut u32, b: usize| {
        if (*mask >> (b + 1)).count_ones() % 2 == 1 {
            *phase += 2;
        }
        *mask ^= 1 << b;
    };
    for (j, &op) in string.iter().enumerate() {
        match op {
            0 => {}
            3 => {
                phase += 3;
                push(&mut mask, &mut phase, 2 * j);
                push(&mut mask, &mut phase, 2 * j + 1);
            }
            1 | 2 => {
                for l in 0..j {
                    phase += 3;
                    push(&mut mask, &mut phase, 2 * l);
                    push(&mut mask, &mut phase, 2 * l + 1);
                }
                push(&mut mask, &mut phase, 2 * j + op - 1);
            }
            _ => return Err(GqdError::InvalidArgument(format!("Pauli index {op}"))),
        }
    }
    let idx: Vec<usize> = (0..2 * corr.n_sites).filter(|b| mask >> b & 1 == 1).collect();
    if idx.len() % 2 == 1 {
        return Ok(0.0);
    }
    let sub = DMatrix::from_fn(idx.len(), idx.len(), |a, b| corr.matrix[(idx[a], idx[b])]);
    let pf = pfaffian(&sub)?;
    match (phase + idx.len() as u32 / 2) % 4 {
        0 => Ok(pf),
        2 => Ok(-pf),
        _ if pf.abs() < 1e-10 => Ok(0.0),
        _ => Err(GqdError::Numerical(format!(
            "imaginary expectation {pf:.3e} for Pauli string {string:?}"
        ))),
    }
}

/// `ρ = 2^{−n} Σ_P ⟨P⟩ P` over all `4^n` Pauli strings.
pub fn xy_block_rdm(corr: &MajoranaCorrelations) -> Result<ReducedDensityMatrix> {
    let n = corr.n_sites;
    let count = 1usize << (2 * n);
    let digits = |s: usize| -> Vec<usize> { (0..n).map(|j| (s >> (2 * (n - 1 - j))) & 3).collect() };
    let expectations = (0..count)
        .into_par_iter()
        .map(|s| pauli_expectation(corr, &digits(s)))
        .collect::<Result<Vec<f64>>>()?;

    let dim = 1usize << n;
    let paulis: Vec<_> = (0..4).map(pauli).collect();
    let mut rho = CMat::zeros(dim, dim);
    let norm = 1.0 / dim as f64;
    for (s, &e) in expectations.iter().enumerate() {
        if e == 0.0 {
            continue;
        }
        let ops = digits(s);
        let flip = ops
            .iter()
            .enumerate()
            .filter(|(_, &op)| op == 1 || op == 2)
            .fold(0usize, |acc, (j, _)| acc | 1 << (n - 1 - j));
        for k in 0..dim {
            let m = k ^ flip;
            let mut coeff = C64::new(e * norm, 0.0);
            for (j, &op) in ops.iter().enumerate() {
                let shift = n - 1 - j;
                coeff *= paulis[op][((k >> shift) & 1, (m >> shift) & 1)];
            }
            rho[(k, m)] += coeff;
        }
    }
    let rho = ReducedDensityMatrix::new(n, rho)?;
    let report = validate_rdm(&rho, 1e-7);
    if !report.passed() {
        return Err(GqdError::Numerical(format!(
            "XY block state failed validation: hermiticity {:.2e}, trace {:.2e}, min eigenvalue {:.2e}",
            report.hermiticity_defect, report.trace_defect, report.min_eigenvalue
        )));
    }
    Ok(rho)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_field_ising_correlator() {
        let g = xy_correlators(XyParams { gamma: 1.0, field_h: 0.0 }, 3).unwrap();
        for (idx, v) in g.iter().enumerate() {
            let want = if idx == 2 { -1.0 } else { 0.0 };
            assert!((v - want).abs() < 1e-12, "r={}: {v}", idx as i64 - 3);
        }
    }

    #[test]
    fn identity_and_parity() {
        let corr = xy_majorana_correlations(XyParams { gamma: 0.5, field_h: 0.8 }, 3).unwrap();
        assert_eq!(pauli_expectation(&corr, &[0, 0, 0]).unwrap(), 1.0);
        assert_eq!(pauli_expectation(&corr, &[1, 0, 0]).unwrap(), 0.0);
        assert_eq!(pauli_expectation(&corr, &[0, 2, 0]).unwrap(), 0.0);
        let m = &corr.matrix;
        assert!((m + m.transpose()).amax() < 1e-15);
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(
            xy_majorana_correlations(XyParams { gamma: 1.0, field_h: 1.0 }, 8),
            Err(GqdError::CapacityExceeded { .. })
        ));
    }
}
