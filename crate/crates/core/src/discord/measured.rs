//! Measured diagonals `ρ̃^{l₁…l_n} = ⟨l| e_{l₁} ⋯ e_{l_n} |r⟩` via a prefix tree.
//!
//! The tree is walked depth first. At depth `k` the running left matrix is
//! `⟨l| e_{l₁} ⋯ e_{l_k}` in matrix form, and one buffer per depth is reused,
//! so memory stays at `n·D²` numbers per subtree no matter how many leaves
//! are visited. The first few levels are expanded eagerly and the resulting
//! subtrees run in parallel; their results are combined in index order, so
//! the output does not depend on scheduling.

use rayon::prelude::*;

use crate::discord::channels::ChannelMatrices;
use crate::linalg::plogp;
use crate::mps::{push_left, BlockEnvironment, InfiniteMps};
use crate::{CMat, GqdError, Result};

/// Largest block for which all `2^n` diagonals are materialised.
pub const MEASURED_BLOCK_CAP: usize = 24;
/// Largest block for the streaming entropy, which keeps no per-leaf storage.
pub const MEASURED_ENTROPY_CAP: usize = 30;
/// Values in `[−NEGATIVE_CLIP, 0)` are round-off and set to zero.
pub const NEGATIVE_CLIP: f64 = 1e-10;

const SPLIT_DEPTH: usize = 5;

/// `(ρ̃^{11}, ρ̃^{22})` for the site at unit-cell `position`.
pub fn measured_site_diagonal(channels: &ChannelMatrices, mps: &InfiniteMps, position: usize) -> Result<[f64; 2]> {
    let env = mps.environment(position, 1)?;
    Ok(site_diagonal(channels.d(position), &env))
}

pub fn site_diagonal(d: &[CMat; 2], env: &BlockEnvironment) -> [f64; 2] {
    [
        clip(env.expectation(&d[0], &d[0]).re),
        clip(env.expectation(&d[1], &d[1]).re),
    ]
}

/// All `2^n` measured diagonals of the block starting at position 0.
pub fn measured_block_diagonals(channels: &ChannelMatrices, mps: &InfiniteMps, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(GqdError::InvalidArgument("block must contain at least one site".into()));
    }
    if n > MEASURED_BLOCK_CAP {
        return Err(GqdError::CapacityExceeded {
            what: "measured block diagonals",
            requested: n,
            cap: MEASURED_BLOCK_CAP,
        });
    }
    let env = mps.environment(0, n)?;
    Ok(block_diagonals(&channels.along_block(0, n), &env))
}

/// Diagonals for explicit per-site channels; `sites.len()` is the block size.
pub fn block_diagonals(sites: &[[CMat; 2]], env: &BlockEnvironment) -> Vec<f64> {
    fold_subtrees(sites, env, Vec::new, |acc: &mut Vec<f64>, p| acc.push(clip(p)))
        .into_iter()
        .flatten()
        .collect()
}

/// Shannon entropy (bits) of the measured block distribution, streamed.
pub fn block_measured_entropy(sites: &[[CMat; 2]], env: &BlockEnvironment) -> Result<f64> {
    if sites.len() > MEASURED_ENTROPY_CAP {
        return Err(GqdError::CapacityExceeded {
            what: "measured block entropy",
            requested: sites.len(),
            cap: MEASURED_ENTROPY_CAP,
        });
    }
    Ok(fold_subtrees(sites, env, || 0.0, |acc: &mut f64, p| *acc += plogp(p))
        .into_iter()
        .sum())
}

fn clip(p: f64) -> f64 {
    if (-NEGATIVE_CLIP..0.0).contains(&p) {
        0.0
    } else {
        p
    }
}

fn fold_subtrees<T, I, F>(sites: &[[CMat; 2]], env: &BlockEnvironment, init: I, leaf: F) -> Vec<T>
where
    T: Send,
    I: Fn() -> T + Sync,
    F: Fn(&mut T, f64) + Sync,
{
    let n = sites.len();
    let split = n.min(SPLIT_DEPTH);
    let roots: Vec<Vec<CMat>> = (0..1usize << split)
        .map(|prefix| {
            let mut v = env.left.clone();
            for (k, site) in sites.iter().enumerate().take(split) {
                let bit = (prefix >> (split - 1 - k)) & 1;
                v = v.iter().map(|m| push_left(m, &site[bit], &site[bit])).collect();
            }
            v
        })
        .collect();

    let d = env.left[0].nrows();
    roots
        .into_par_iter()
        .map(|root| {
            let mut acc = init();
            let mut bufs = vec![root];
            bufs.extend((split..n).map(|_| vec![CMat::zeros(d, d); env.left.len()]));
            let mut tmp = CMat::zeros(d, d);
            descend(sites, env, split, &mut bufs, &mut tmp, &mut |p| leaf(&mut acc, p));
            acc
        })
        .collect()
}

fn descend<F: FnMut(f64)>(
    sites: &[[CMat; 2]],
    env: &BlockEnvironment,
    depth: usize,
    bufs: &mut [Vec<CMat>],
    tmp: &mut CMat,
    leaf: &mut F,
) {
    if depth == sites.len() {
        leaf(env.close(&bufs[0]).re);
        return;
    }
    let (cur, rest) = bufs.split_first_mut().expect("one buffer per remaining depth");
    for d in &sites[depth] {
        for (v, out) in cur.iter().zip(rest[0].iter_mut()) {
            v.mul_to(d, tmp);
            d.ad_mul_to(tmp, out);
        }
        descend(sites, env, depth + 1, rest, tmp, leaf);
    }
}
