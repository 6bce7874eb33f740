use std::fmt;

use nalgebra::Matrix2;

use crate::discord::channels::block_channels;
use crate::discord::entropy::{dense_block_entropy, truncated_block_entropy_at, von_neumann_entropy, TruncationOptions};
use crate::discord::measured::{block_measured_entropy, site_diagonal};
use crate::discord::rotation::RotationAngles;
use crate::linalg::shannon_entropy;
use crate::mps::{BlockEnvironment, InfiniteMps};
use crate::rdm::{single_site_rdm, ReducedDensityMatrix};
use crate::{CMat, GqdError, Result, C64};

/// Largest block handled by [`DenseDiscordState`].
pub const DENSE_DISCORD_CAP: usize = 10;

/// The four entropies making up the discord, in bits.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GqdTerms {
    /// `Σ_j H(ρ̃_j)`.
    pub measured_site_entropy: f64,
    /// `H(ρ̃)`.
    pub measured_block_entropy: f64,
    /// `Σ_j S(ρ_j)`.
    pub site_entropy: f64,
    /// `S(ρ)`.
    pub block_entropy: f64,
}

impl GqdTerms {
    pub fn value(&self) -> f64 {
        self.angle_part() + self.site_entropy - self.block_entropy
    }

    /// `H(ρ̃) − Σ_j H(ρ̃_j)`, the only measurement-dependent part.
    pub fn angle_part(&self) -> f64 {
        self.measured_block_entropy - self.measured_site_entropy
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntropyMethod {
    Dense,
    Truncated { tau: usize },
}

impl fmt::Display for EntropyMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EntropyMethod::Dense => write!(f, "dense"),
            EntropyMethod::Truncated { tau } => write!(f, "truncated(tau={tau})"),
        }
    }
}

/// A block state whose discord can be evaluated for any set of local
/// measurement bases.
pub trait DiscordState: Sync {
    fn n_sites(&self) -> usize;

    /// `(Σ_j S(ρ_j), S(ρ))`.
    fn static_entropies(&self) -> (f64, f64);

    /// `(Σ_j H(ρ̃_j), H(ρ̃))` for one rotation per site.
    fn measured_entropies(&self, rotations: &[Matrix2<C64>]) -> Result<(f64, f64)>;

    fn entropy_method(&self) -> EntropyMethod;

    fn warnings(&self) -> Vec<String> {
        Vec::new()
    }

    fn terms(&self, rotations: &[Matrix2<C64>]) -> Result<GqdTerms> {
        let (measured_site_entropy, measured_block_entropy) = self.measured_entropies(rotations)?;
        let (site_entropy, block_entropy) = self.static_entropies();
        Ok(GqdTerms {
            measured_site_entropy,
            measured_block_entropy,
            site_entropy,
            block_entropy,
        })
    }
}

/// Block of an infinite MPS evaluated through the transfer-matrix formulas.
#[derive(Debug, Clone)]
pub struct MpsDiscordState {
    mps: InfiniteMps,
    start: usize,
    n: usize,
    block_env: BlockEnvironment,
    site_envs: Vec<BlockEnvironment>,
    site_entropy: f64,
    block_entropy: f64,
    method: EntropyMethod,
    warnings: Vec<String>,
}

impl MpsDiscordState {
    pub fn new(mps: &InfiniteMps, start: usize, n: usize, method: EntropyMethod) -> Result<Self> {
        Self::with_truncation(mps, start, n, method, &TruncationOptions::default())
    }

    /// Dense entropy up to `dense_cap` sites, truncated with `truncation.tau` above.
    pub fn auto(mps: &InfiniteMps, n: usize, dense_cap: usize, truncation: &TruncationOptions) -> Result<Self> {
        let method = if n <= dense_cap {
            EntropyMethod::Dense
        } else {
            EntropyMethod::Truncated { tau: truncation.tau }
        };
        Self::with_truncation(mps, 0, n, method, truncation)
    }

    pub fn with_truncation(
        mps: &InfiniteMps,
        start: usize,
        n: usize,
        method: EntropyMethod,
        truncation: &TruncationOptions,
    ) -> Result<Self> {
        if n == 0 {
            return Err(GqdError::InvalidArgument("block must contain at least one site".into()));
        }
        let uc = mps.tensors.unit_cell();
        let site_envs = (0..uc).map(|p| mps.environment(p, 1)).collect::<Result<Vec<_>>>()?;
        let per_position = (0..uc)
            .map(|p| Ok(von_neumann_entropy(&single_site_rdm(&mps.tensors, &mps.fixed_point, p)?)))
            .collect::<Result<Vec<f64>>>()?;
        let site_entropy = (0..n).map(|i| per_position[(start + i) % uc]).sum();

        let mut warnings = Vec::new();
        let block_entropy = match method {
            EntropyMethod::Dense => dense_block_entropy(&mps.tensors, &mps.fixed_point, start, n, usize::MAX)?,
            EntropyMethod::Truncated { tau } => {
                let opts = TruncationOptions {
                    tau,
                    ..truncation.clone()
                };
                let t = truncated_block_entropy_at(&mps.tensors, &mps.fixed_point, start, n, &opts)?;
                warnings.extend(t.warnings);
                t.entropy
            }
        };
        Ok(Self {
            mps: mps.clone(),
            start,
            n,
            block_env: mps.environment(start, n)?,
            site_envs,
            site_entropy,
            block_entropy,
            method,
            warnings,
        })
    }
}

impl DiscordState for MpsDiscordState {
    fn n_sites(&self) -> usize {
        self.n
    }

    fn static_entropies(&self) -> (f64, f64) {
        (self.site_entropy, self.block_entropy)
    }

    fn measured_entropies(&self, rotations: &[Matrix2<C64>]) -> Result<(f64, f64)> {
        if rotations.len() != self.n {
            return Err(GqdError::Dimension(format!(
                "{} rotations for a {}-site block",
                rotations.len(),
                self.n
            )));
        }
        let sites = block_channels(&self.mps.tensors, self.start, rotations);
        let uc = self.site_envs.len();
        let site_sum = sites
            .iter()
            .enumerate()
            .map(|(i, d)| shannon_entropy(&site_diagonal(d, &self.site_envs[(self.start + i) % uc])))
            .sum();
        let block = block_measured_entropy(&sites, &self.block_env)?;
        Ok((site_sum, block))
    }

    fn entropy_method(&self) -> EntropyMethod {
        self.method
    }

    fn warnings(&self) -> Vec<String> {
        self.warnings.clone()
    }
}

/// Explicit density matrix, rotated site by site.
#[derive(Debug, Clone)]
pub struct DenseDiscordState {
    rho: ReducedDensityMatrix,
    marginals: Vec<CMat>,
    site_entropy: f64,
    block_entropy: f64,
}

impl DenseDiscordState {
    pub fn new(rho: &ReducedDensityMatrix) -> Result<Self> {
        let n = rho.n_sites();
        if n > DENSE_DISCORD_CAP {
            return Err(GqdError::CapacityExceeded {
                what: "dense discord sites",
                requested: n,
                cap: DENSE_DISCORD_CAP,
            });
        }
        let marginals = (0..n)
            .map(|j| rho.site_marginal(j))
            .collect::<Result<Vec<_>>>()?;
        let site_entropy = marginals.iter().map(von_neumann_entropy).sum();
        Ok(Self {
            rho: rho.clone(),
            marginals: marginals.into_iter().map(|m| m.into_entries()).collect(),
            site_entropy,
            block_entropy: von_neumann_entropy(rho),
        })
    }
}

impl DiscordState for DenseDiscordState {
    fn n_sites(&self) -> usize {
        self.rho.n_sites()
    }

    fn static_entropies(&self) -> (f64, f64) {
        (self.site_entropy, self.block_entropy)
    }

    fn measured_entropies(&self, rotations: &[Matrix2<C64>]) -> Result<(f64, f64)> {
        let n = self.n_sites();
        if rotations.len() != n {
            return Err(GqdError::Dimension(format!("{} rotations for a {n}-site block", rotations.len())));
        }
        let site_sum = self
            .marginals
            .iter()
            .zip(rotations)
            .map(|(m, r)| {
                let r = crate::pauli::to_dense(r);
                let p = r.adjoint() * m * r;
                shannon_entropy(&[p[(0, 0)].re, p[(1, 1)].re])
            })
            .sum();
        let mut m = self.rho.entries().clone();
        for (j, r) in rotations.iter().enumerate() {
            conjugate_site(&mut m, n, j, r);
        }
        let diag: Vec<f64> = (0..m.nrows()).map(|i| m[(i, i)].re).collect();
        Ok((site_sum, shannon_entropy(&diag)))
    }

    fn entropy_method(&self) -> EntropyMethod {
        EntropyMethod::Dense
    }
}

/// `m ← (I ⊗ R_j ⊗ I)† m (I ⊗ R_j ⊗ I)` for site `j` of an `n`-site matrix.
fn conjugate_site(m: &mut CMat, n: usize, j: usize, r: &Matrix2<C64>) {
    let bit = 1usize << (n - 1 - j);
    let dim = m.nrows();
    let ra = r.adjoint();
    for col in 0..dim {
        for i0 in (0..dim).filter(|i| i & bit == 0) {
            let i1 = i0 | bit;
            let (a0, a1) = (m[(i0, col)], m[(i1, col)]);
            m[(i0, col)] = ra[(0, 0)] * a0 + ra[(0, 1)] * a1;
            m[(i1, col)] = ra[(1, 0)] * a0 + ra[(1, 1)] * a1;
        }
    }
    for row in 0..dim {
        for c0 in (0..dim).filter(|c| c & bit == 0) {
            let c1 = c0 | bit;
            let (a0, a1) = (m[(row, c0)], m[(row, c1)]);
            m[(row, c0)] = a0 * r[(0, 0)] + a1 * r[(1, 0)];
            m[(row, c1)] = a0 * r[(0, 1)] + a1 * r[(1, 1)];
        }
    }
}

/// `Σ_j Σ_l ρ̃_j^{ll} log₂ ρ̃_j^{ll} − Σ_l ρ̃^{ll} log₂ ρ̃^{ll}` for the block
/// starting at position 0; the remaining entropies are angle independent.
pub fn campbell_objective(mps: &InfiniteMps, n: usize, angles: &RotationAngles) -> Result<f64> {
    let rotations = angles.rotations(n)?;
    let sites = block_channels(&mps.tensors, 0, &rotations);
    let uc = mps.tensors.unit_cell();
    let mut site_sum = 0.0;
    for (i, d) in sites.iter().enumerate() {
        let env = mps.environment(i % uc, 1)?;
        site_sum += shannon_entropy(&site_diagonal(d, &env));
    }
    let block = block_measured_entropy(&sites, &mps.environment(0, n)?)?;
    Ok(block - site_sum)
}
