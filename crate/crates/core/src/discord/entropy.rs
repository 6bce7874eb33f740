//! Von Neumann entropies of single sites and blocks.
//!
//! Large blocks use a renormalised basis: starting from the `16` strings of
//! a 4-site block, the block density matrix is diagonalised, only the `τ`
//! dominant eigenvectors `U` are kept (`S̃ = S·U`), one site is appended
//! (`S̃_c M_j`) and the procedure repeats until the block has `n` sites.

use log::warn;

use crate::linalg::{hermitian_eigenvalues, hermitian_eigh, spectrum_entropy};
use crate::mps::{BlockEnvironment, DominantEigenpair, SiteTensorSet};
use crate::rdm::{block_rdm_at, block_strings, ReducedDensityMatrix};
use crate::{CMat, GqdError, Result, C64};

/// Eigenvectors with weight at or below this are never kept.
const KEEP_FLOOR: f64 = 1e-15;
const INITIAL_BLOCK: usize = 4;

pub fn von_neumann_entropy(rho: &ReducedDensityMatrix) -> f64 {
    spectrum_entropy(&hermitian_eigenvalues(rho.entries()))
}

/// Entropy of the dense block state; bounded by `cap` sites.
pub fn dense_block_entropy(
    tensors: &SiteTensorSet,
    eig: &DominantEigenpair,
    start: usize,
    n: usize,
    cap: usize,
) -> Result<f64> {
    Ok(von_neumann_entropy(&block_rdm_at(tensors, eig, start, n, cap)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncationOptions {
    pub tau: usize,
    /// Discarded weight above which a warning is attached.
    pub warn_threshold: f64,
    /// Discarded weight above which the computation fails.
    pub fail_threshold: f64,
}

impl Default for TruncationOptions {
    fn default() -> Self {
        Self {
            tau: 256,
            warn_threshold: 1e-8,
            fail_threshold: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedEntropy {
    pub entropy: f64,
    /// Total spectral weight dropped over all truncation steps.
    pub discarded_weight: f64,
    /// Size of the renormalised basis at the last step.
    pub basis_size: usize,
    pub warnings: Vec<String>,
}

/// Truncated entropy of the `n`-site block starting at position 0.
pub fn truncated_block_entropy(
    tensors: &SiteTensorSet,
    eig: &DominantEigenpair,
    n: usize,
    tau: usize,
) -> Result<TruncatedEntropy> {
    truncated_block_entropy_at(
        tensors,
        eig,
        0,
        n,
        &TruncationOptions {
            tau,
            ..TruncationOptions::default()
        },
    )
}

pub fn truncated_block_entropy_at(
    tensors: &SiteTensorSet,
    eig: &DominantEigenpair,
    start: usize,
    n: usize,
    opts: &TruncationOptions,
) -> Result<TruncatedEntropy> {
    if n < INITIAL_BLOCK {
        return Err(GqdError::InvalidArgument(format!(
            "truncated entropy needs at least {INITIAL_BLOCK} sites, got {n}"
        )));
    }
    if opts.tau < 4 {
        return Err(GqdError::InvalidArgument(format!("τ must be at least 4, got {}", opts.tau)));
    }
    let d = tensors.bond_dimension();
    let mut basis = block_strings(tensors, start, INITIAL_BLOCK);
    let mut discarded = 0.0;
    let mut x = INITIAL_BLOCK;
    loop {
        let env = BlockEnvironment::new(tensors, eig, start, x)?;
        let (a, rho) = gram(&basis, &env, d);
        if x == n {
            let entropy = spectrum_entropy(&hermitian_eigenvalues(&rho));
            let mut warnings = Vec::new();
            if discarded > opts.fail_threshold {
                return Err(GqdError::Truncation {
                    discarded,
                    threshold: opts.fail_threshold,
                });
            }
            if discarded > opts.warn_threshold {
                let msg = format!("truncation discarded weight {discarded:.3e} (n={n}, τ={})", opts.tau);
                warn!("{msg}");
                warnings.push(msg);
            }
            return Ok(TruncatedEntropy {
                entropy,
                discarded_weight: discarded,
                basis_size: basis.len(),
                warnings,
            });
        }

        let (values, vectors) = hermitian_eigh(&rho);
        let keep = values
            .iter()
            .take(opts.tau)
            .take_while(|&&v| v > KEEP_FLOOR)
            .count()
            .max(1);
        discarded += values[keep..].iter().map(|v| v.max(0.0)).sum::<f64>();
        if discarded > opts.fail_threshold {
            return Err(GqdError::Truncation {
                discarded,
                threshold: opts.fail_threshold,
            });
        }
        let rotated = a * vectors.columns(0, keep);
        let pair = tensors.at(start + x);
        basis = (0..keep)
            .flat_map(|c| {
                let s = CMat::from_fn(d, d, |i, j| rotated[(i * d + j, c)]);
                [&s * &pair[0], &s * &pair[1]]
            })
            .collect();
        x += 1;
    }
}

/// Column-stacked basis `A` (`vec(S̃_a)` in column `a`) and the block state
/// in that basis.
fn gram(basis: &[CMat], env: &BlockEnvironment, d: usize) -> (CMat, CMat) {
    let k = basis.len();
    let a = CMat::from_fn(d * d, k, |i, c| basis[c][(i / d, i % d)]);
    let a_adj = a.adjoint();
    let mut rho = CMat::zeros(k, k);
    for (l, r) in env.left.iter().zip(&env.right) {
        let rt = r.transpose();
        let mut b = CMat::zeros(d * d, k);
        for (c, s) in basis.iter().enumerate() {
            let y = l * s * &rt;
            for i in 0..d * d {
                b[(i, c)] = y[(i / d, i % d)];
            }
        }
        rho += &a_adj * b;
    }
    rho *= C64::new(env.weight, 0.0);
    (a, rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mps::{EigenOptions, InfiniteMps};
    use crate::CVec;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn entropy_of_diagonal_states() {
        let pure = ReducedDensityMatrix::new(1, CMat::from_diagonal(&CVec::from_vec(vec![c(1.0), c(0.0)]))).unwrap();
        assert_eq!(von_neumann_entropy(&pure), 0.0);
        let mixed = ReducedDensityMatrix::new(1, CMat::identity(2, 2) * c(0.5)).unwrap();
        assert!((von_neumann_entropy(&mixed) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn product_state_has_no_block_entropy() {
        let set = SiteTensorSet::uniform(CMat::from_element(1, 1, c(0.6)), CMat::from_element(1, 1, c(0.8))).unwrap();
        let mps = InfiniteMps::new(&set, &EigenOptions::default()).unwrap();
        for n in [4, 7, 12] {
            let t = truncated_block_entropy(&mps.tensors, &mps.fixed_point, n, 4).unwrap();
            assert!(t.entropy.abs() < 1e-12);
            assert!(t.warnings.is_empty());
        }
    }

    #[test]
    fn preconditions() {
        let set = SiteTensorSet::uniform(CMat::from_element(1, 1, c(1.0)), CMat::from_element(1, 1, c(0.0))).unwrap();
        let mps = InfiniteMps::new(&set, &EigenOptions::default()).unwrap();
        assert!(truncated_block_entropy(&mps.tensors, &mps.fixed_point, 3, 8).is_err());
        assert!(truncated_block_entropy(&mps.tensors, &mps.fixed_point, 6, 3).is_err());
    }
}
