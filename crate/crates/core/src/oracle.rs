//! Dense reference implementations.
//!
//! Everything here works on explicit `2^n × 2^n` matrices, building the full
//! measurement unitary `R^{⊗n}` where needed. These are deliberately simple
//! and slow, and serve as the yardstick for the transfer-matrix paths.

use nalgebra::{Matrix2, Matrix3};

use crate::discord::objective::{DiscordState, EntropyMethod};
use crate::discord::optimize::{minimize_state, GqdConfig, GqdResult};
use crate::discord::rotation::RotationAngles;
use crate::discord::von_neumann_entropy;
use crate::linalg::{hermitian_eigh, hermitian_part, shannon_entropy};
use crate::pauli::{pauli, sigma_x, sigma_y, tensor_product, two_site};
use crate::rdm::ReducedDensityMatrix;
use crate::{CMat, GqdError, Result, C64};

/// Largest block the dense oracle accepts.
pub const ORACLE_CAP: usize = 10;

fn check_cap(n: usize) -> Result<()> {
    if n > ORACLE_CAP {
        return Err(GqdError::CapacityExceeded {
            what: "dense oracle sites",
            requested: n,
            cap: ORACLE_CAP,
        });
    }
    Ok(())
}

/// Diagonal of `U† ρ U` with `U = R_1 ⊗ ⋯ ⊗ R_n` built explicitly.
pub fn dense_measured_diagonals(rho: &ReducedDensityMatrix, angles: &RotationAngles) -> Result<Vec<f64>> {
    check_cap(rho.n_sites())?;
    let rotations = angles.rotations(rho.n_sites())?;
    Ok(diagonal_with(rho.entries(), &rotations))
}

fn diagonal_with(rho: &CMat, rotations: &[Matrix2<C64>]) -> Vec<f64> {
    let u = tensor_product(rotations);
    let m = u.adjoint() * rho * u;
    (0..m.nrows()).map(|i| m[(i, i)].re).collect()
}

struct BruteForceState {
    rho: CMat,
    marginals: Vec<CMat>,
    site_entropy: f64,
    block_entropy: f64,
}

impl DiscordState for BruteForceState {
    fn n_sites(&self) -> usize {
        self.marginals.len()
    }

    fn static_entropies(&self) -> (f64, f64) {
        (self.site_entropy, self.block_entropy)
    }

    fn measured_entropies(&self, rotations: &[Matrix2<C64>]) -> Result<(f64, f64)> {
        let site = self
            .marginals
            .iter()
            .zip(rotations)
            .map(|(m, r)| shannon_entropy(&diagonal_with(m, std::slice::from_ref(r))))
            .sum();
        Ok((site, shannon_entropy(&diagonal_with(&self.rho, rotations))))
    }

    fn entropy_method(&self) -> EntropyMethod {
        EntropyMethod::Dense
    }
}

/// Discord of an explicit block state with dense diagonals and entropies.
pub fn brute_force_gqd(rho: &ReducedDensityMatrix, config: &GqdConfig) -> Result<GqdResult> {
    check_cap(rho.n_sites())?;
    let marginals = (0..rho.n_sites())
        .map(|j| rho.site_marginal(j))
        .collect::<Result<Vec<_>>>()?;
    let state = BruteForceState {
        rho: rho.entries().clone(),
        site_entropy: marginals.iter().map(von_neumann_entropy).sum(),
        block_entropy: von_neumann_entropy(rho),
        marginals: marginals.into_iter().map(|m| m.into_entries()).collect(),
    };
    minimize_state(&state, config)
}

fn check_two_qubit(rho: &CMat) -> Result<()> {
    if rho.nrows() != 4 || rho.ncols() != 4 {
        return Err(GqdError::Dimension(format!(
            "two-qubit measure needs a 4x4 matrix, got {}x{}",
            rho.nrows(),
            rho.ncols()
        )));
    }
    Ok(())
}

/// Wootters concurrence `max(0, λ₁ − λ₂ − λ₃ − λ₄)`, where `λ` are the
/// square roots of the eigenvalues of `ρ (σ^y ⊗ σ^y) ρ^* (σ^y ⊗ σ^y)`.
///
/// The `λ` are obtained as singular values of `√ρ √ρ̃`, which avoids taking
/// square roots of eigenvalues that are zero up to round-off.
pub fn concurrence(rho: &CMat) -> Result<f64> {
    check_two_qubit(rho)?;
    let (values, vectors) = hermitian_eigh(rho);
    let roots = CMat::from_diagonal(&crate::CVec::from_iterator(
        4,
        values.iter().map(|v| C64::new(v.max(0.0).sqrt(), 0.0)),
    ));
    let sqrt_rho = &vectors * roots * vectors.adjoint();
    let yy = two_site(&sigma_y(), &sigma_y());
    let sqrt_flipped = &yy * sqrt_rho.conjugate() * &yy;
    let mut s: Vec<f64> = (sqrt_rho * sqrt_flipped).singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok((s[0] - s[1] - s[2] - s[3]).max(0.0))
}

/// Correlation matrix `T_{ab} = Tr[ρ σ^a ⊗ σ^b]`, `a, b ∈ {x, y, z}`.
pub fn correlation_matrix(rho: &CMat) -> Result<Matrix3<f64>> {
    check_two_qubit(rho)?;
    Ok(Matrix3::from_fn(|a, b| (rho * two_site(&pauli(a + 1), &pauli(b + 1))).trace().re))
}

/// Maximal CHSH expectation `2√(u₁ + u₂)`, `u₁ ≥ u₂` the two largest
/// eigenvalues of `TᵀT`.
pub fn chsh_violation(rho: &CMat) -> Result<f64> {
    let t = correlation_matrix(rho)?;
    let mut u: Vec<f64> = (t.transpose() * t).symmetric_eigenvalues().iter().copied().collect();
    u.sort_by(|a, b| b.total_cmp(a));
    Ok(2.0 * (u[0] + u[1]).max(0.0).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoSiteMeasures {
    pub concurrence: f64,
    pub chsh_value: f64,
    pub discord_g2: f64,
}

pub fn two_site_measures(rho: &ReducedDensityMatrix, config: &GqdConfig) -> Result<TwoSiteMeasures> {
    if rho.n_sites() != 2 {
        return Err(GqdError::Dimension(format!("expected 2 sites, got {}", rho.n_sites())));
    }
    Ok(TwoSiteMeasures {
        concurrence: concurrence(rho.entries())?,
        chsh_value: chsh_violation(rho.entries())?,
        discord_g2: brute_force_gqd(rho, config)?.value,
    })
}

/// Equal mixture of `ρ` and its image under the global spin flip `Π σ^x`.
pub fn spin_flip_symmetrize(rho: &ReducedDensityMatrix) -> Result<ReducedDensityMatrix> {
    let flip = tensor_product(&vec![sigma_x(); rho.n_sites()]);
    let m = (rho.entries() + &flip * rho.entries() * &flip) * C64::new(0.5, 0.0);
    ReducedDensityMatrix::new(rho.n_sites(), hermitian_part(&m))
}

/// `|ψ⟩⟨ψ|` for a state vector in the computational basis.
pub fn pure_state(amplitudes: &[C64]) -> Result<ReducedDensityMatrix> {
    let dim = amplitudes.len();
    if !dim.is_power_of_two() || dim < 2 {
        return Err(GqdError::Dimension(format!("{dim} amplitudes is not a qubit register")));
    }
    let v = crate::CVec::from_column_slice(amplitudes);
    let norm = v.norm();
    let v = v / C64::new(norm, 0.0);
    ReducedDensityMatrix::new(dim.trailing_zeros() as usize, &v * v.adjoint())
}

/// Tensor product of single-site states.
pub fn product_state(sites: &[Matrix2<C64>]) -> Result<ReducedDensityMatrix> {
    ReducedDensityMatrix::new(sites.len(), tensor_product(sites))
}
