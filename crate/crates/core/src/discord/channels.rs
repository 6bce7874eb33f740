use nalgebra::Matrix2;

use crate::discord::rotation::RotationAngles;
use crate::mps::SiteTensorSet;
use crate::{CMat, Result, C64};

/// Measurement-dressed site tensors `d_l = Σ_n M_n ⟨n|R|l⟩`, one pair per
/// unit-cell position.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrices {
    d: Vec<[CMat; 2]>,
}

impl ChannelMatrices {
    pub fn d(&self, position: usize) -> &[CMat; 2] {
        &self.d[position % self.d.len()]
    }

    /// `e_l = d_l^* ⊗ d_l` at a unit-cell position.
    pub fn e(&self, position: usize, l: usize) -> CMat {
        let d = &self.d(position)[l];
        d.conjugate().kronecker(d)
    }

    pub fn unit_cell(&self) -> usize {
        self.d.len()
    }

    /// Channel pairs for the consecutive sites `start, …, start + n − 1`.
    pub fn along_block(&self, start: usize, n: usize) -> Vec<[CMat; 2]> {
        (0..n).map(|i| self.d(start + i).clone()).collect()
    }
}

pub fn site_channels(pair: &[CMat; 2], r: &Matrix2<C64>) -> [CMat; 2] {
    [
        &pair[0] * r[(0, 0)] + &pair[1] * r[(1, 0)],
        &pair[0] * r[(0, 1)] + &pair[1] * r[(1, 1)],
    ]
}

/// Site-independent channels for the shared `(θ, φ)`; per-site angles are
/// handled by [`block_channels`].
pub fn channel_matrices(tensors: &SiteTensorSet, angles: &RotationAngles) -> ChannelMatrices {
    let r = crate::discord::rotation::rotation_matrix(angles.theta, angles.phi);
    ChannelMatrices {
        d: tensors.tensors().iter().map(|pair| site_channels(pair, &r)).collect(),
    }
}

/// Channel pairs for each site of a block, with one rotation per site.
pub fn block_channels(tensors: &SiteTensorSet, start: usize, rotations: &[Matrix2<C64>]) -> Vec<[CMat; 2]> {
    rotations
        .iter()
        .enumerate()
        .map(|(i, r)| site_channels(tensors.at(start + i), r))
        .collect()
}

/// Channels for every site of an `n`-site block under `angles`.
pub fn channels_for_block(
    tensors: &SiteTensorSet,
    start: usize,
    n: usize,
    angles: &RotationAngles,
) -> Result<Vec<[CMat; 2]>> {
    Ok(block_channels(tensors, start, &angles.rotations(n)?))
}
