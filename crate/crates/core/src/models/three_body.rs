use nalgebra::DMatrix;

use crate::linalg::real_to_complex;
use crate::mps::{normalize_tensors_with, DegeneracyPolicy, EigenOptions, InfiniteMps, SiteTensorSet};
use crate::Result;

/// Coupling `g` of the three-body chain
/// `H = Σ [J₃ σ^z_{i−1} σ^x_i σ^z_{i+1} + J_z σ^z_i σ^z_{i+1} + B σ^x_i]`
/// on the line `J₃ = (g − 1)²`, `J_z = 2(g² − 1)`, where the ground state is
/// an exact MPS. The critical point is `g = 0`; `g = −1` is the cluster
/// state and `g = 1` the `x`-polarised product state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeBodyParams {
    pub g: f64,
}

/// `M_down = [[0, 0], [1, 1]]`, `M_up = [[1, g], [0, 0]]`, normalised.
pub fn three_body_tensors(params: ThreeBodyParams) -> Result<SiteTensorSet> {
    let raw = SiteTensorSet::uniform(
        real_to_complex(&DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 1.0])),
        real_to_complex(&DMatrix::from_row_slice(2, 2, &[1.0, params.g, 0.0, 0.0])),
    )?;
    normalize_tensors_with(&raw, &EigenOptions::default())
}

/// Eigen options used for this model: the transfer matrix at `g = 0` has a
/// defective dominant eigenvalue, which is resolved by averaging over the
/// generalized eigenspace.
pub fn three_body_eigen_options() -> EigenOptions {
    EigenOptions {
        degeneracy: DegeneracyPolicy::AverageGeneralized,
        ..EigenOptions::default()
    }
}

pub fn three_body_mps(params: ThreeBodyParams) -> Result<InfiniteMps> {
    InfiniteMps::new(&three_body_tensors(params)?, &three_body_eigen_options())
}
