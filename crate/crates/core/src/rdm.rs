//! Reduced density matrices of consecutive blocks of an infinite MPS.
//!
//! Entry `(k, m)` of the `n`-site block state is
//! `⟨l| S_k^* ⊗ S_m |r⟩`, where `S_k` is the ordered product of site tensors
//! selected by the bits of `k` (leftmost site = most significant bit). In
//! matrix form this is the Frobenius product `⟨S_k, L S_m Rᵀ⟩`.
//!
//! Binary dumps written by [`write_rdm`] consist of an 8-byte little-endian
//! `u64` holding `n`, followed by the `2^n × 2^n` entries in row-major order,
//! each stored as two little-endian `f64` (real part, then imaginary part).

use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use crate::linalg::hermitian_eigenvalues;
use crate::mps::{BlockEnvironment, DominantEigenpair, SiteTensorSet};
use crate::{CMat, GqdError, Result, C64};

/// Largest block for which the full `2^n × 2^n` matrix is built.
pub const DENSE_RDM_CAP: usize = 14;

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedDensityMatrix {
    n_sites: usize,
    entries: CMat,
}

impl ReducedDensityMatrix {
    pub fn new(n_sites: usize, entries: CMat) -> Result<Self> {
        let dim = 1usize << n_sites;
        if n_sites == 0 || entries.nrows() != dim || entries.ncols() != dim {
            return Err(GqdError::Dimension(format!(
                "{} sites need a {dim}x{dim} matrix, got {}x{}",
                n_sites,
                entries.nrows(),
                entries.ncols()
            )));
        }
        Ok(Self { n_sites, entries })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMat {
        &self.entries
    }

    pub fn into_entries(self) -> CMat {
        self.entries
    }

    pub fn trace(&self) -> C64 {
        self.entries.trace()
    }

    /// Traces out the rightmost site.
    pub fn trace_out_last(&self) -> Result<Self> {
        if self.n_sites < 2 {
            return Err(GqdError::InvalidArgument("cannot trace out the only site".into()));
        }
        let half = self.dim() / 2;
        let m = CMat::from_fn(half, half, |a, b| {
            self.entries[(2 * a, 2 * b)] + self.entries[(2 * a + 1, 2 * b + 1)]
        });
        Self::new(self.n_sites - 1, m)
    }

    /// Traces out the leftmost site.
    pub fn trace_out_first(&self) -> Result<Self> {
        if self.n_sites < 2 {
            return Err(GqdError::InvalidArgument("cannot trace out the only site".into()));
        }
        let half = self.dim() / 2;
        let m = CMat::from_fn(half, half, |a, b| {
            self.entries[(a, b)] + self.entries[(half + a, half + b)]
        });
        Self::new(self.n_sites - 1, m)
    }

    /// Single-site marginal of site `j` (0 = leftmost).
    pub fn site_marginal(&self, j: usize) -> Result<Self> {
        if j >= self.n_sites {
            return Err(GqdError::InvalidArgument(format!(
                "site {j} outside a {}-site block",
                self.n_sites
            )));
        }
        let shift = self.n_sites - 1 - j;
        let bit = 1usize << shift;
        let mut m = CMat::zeros(2, 2);
        for idx in 0..self.dim() {
            if idx & bit != 0 {
                continue;
            }
            for s in 0..2 {
                for t in 0..2 {
                    m[(s, t)] += self.entries[(idx | (s * bit), idx | (t * bit))];
                }
            }
        }
        Self::new(1, m)
    }
}

/// Dense `n`-site block starting at unit-cell position 0.
pub fn block_rdm(tensors: &SiteTensorSet, eig: &DominantEigenpair, n: usize) -> Result<ReducedDensityMatrix> {
    block_rdm_at(tensors, eig, 0, n, DENSE_RDM_CAP)
}

/// Dense `n`-site block whose first site is at unit-cell position `start`.
pub fn block_rdm_at(
    tensors: &SiteTensorSet,
    eig: &DominantEigenpair,
    start: usize,
    n: usize,
    cap: usize,
) -> Result<ReducedDensityMatrix> {
    if n == 0 {
        return Err(GqdError::InvalidArgument("block must contain at least one site".into()));
    }
    if n > cap {
        return Err(GqdError::CapacityExceeded {
            what: "dense block RDM sites",
            requested: n,
            cap,
        });
    }
    let env = BlockEnvironment::new(tensors, eig, start, n)?;
    let strings = block_strings(tensors, start, n);
    let d = tensors.bond_dimension();
    let dim = strings.len();

    // Columns vec(S_k) and vec(L S_m Rᵀ); ρ = Σ_p w · A† B_p.
    let a = CMat::from_fn(d * d, dim, |i, k| strings[k][(i / d, i % d)]);
    let mut rho = CMat::zeros(dim, dim);
    for (l, r) in env.left.iter().zip(&env.right) {
        let rt = r.transpose();
        let b = {
            let mut b = CMat::zeros(d * d, dim);
            for (m, s) in strings.iter().enumerate() {
                let x = l * s * &rt;
                for i in 0..d * d {
                    b[(i, m)] = x[(i / d, i % d)];
                }
            }
            b
        };
        rho += a.adjoint() * b;
    }
    rho *= C64::new(env.weight, 0.0);
    ReducedDensityMatrix::new(n, rho)
}

/// All `2^n` products `M_{j1} ⋯ M_{jn}` in basis order.
pub fn block_strings(tensors: &SiteTensorSet, start: usize, n: usize) -> Vec<CMat> {
    let d = tensors.bond_dimension();
    let mut level = vec![CMat::identity(d, d)];
    for i in 0..n {
        let pair = tensors.at(start + i);
        level = level
            .iter()
            .flat_map(|s| [s * &pair[0], s * &pair[1]])
            .collect();
    }
    level
}

pub fn single_site_rdm(
    tensors: &SiteTensorSet,
    eig: &DominantEigenpair,
    position: usize,
) -> Result<ReducedDensityMatrix> {
    block_rdm_at(tensors, eig, position, 1, DENSE_RDM_CAP)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub hermiticity_defect: f64,
    pub trace_defect: f64,
    pub min_eigenvalue: f64,
    pub tol: f64,
}

impl ValidationReport {
    pub fn hermitian(&self) -> bool {
        self.hermiticity_defect <= self.tol
    }

    pub fn unit_trace(&self) -> bool {
        self.trace_defect <= self.tol
    }

    pub fn positive(&self) -> bool {
        self.min_eigenvalue >= -self.tol
    }

    pub fn passed(&self) -> bool {
        self.hermitian() && self.unit_trace() && self.positive()
    }
}

pub fn validate_rdm(rho: &ReducedDensityMatrix, tol: f64) -> ValidationReport {
    let m = rho.entries();
    let hermiticity_defect = (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let trace_defect = (rho.trace() - C64::new(1.0, 0.0)).norm();
    let min_eigenvalue = hermitian_eigenvalues(m).last().copied().unwrap_or(0.0);
    ValidationReport {
        hermiticity_defect,
        trace_defect,
        min_eigenvalue,
        tol,
    }
}

pub fn write_rdm<W: Write>(rho: &ReducedDensityMatrix, mut out: W) -> Result<()> {
    out.write_u64::<LittleEndian>(rho.n_sites() as u64)?;
    let m = rho.entries();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.write_f64::<LittleEndian>(m[(i, j)].re)?;
            out.write_f64::<LittleEndian>(m[(i, j)].im)?;
        }
    }
    Ok(())
}

pub fn read_rdm<R: Read>(mut input: R) -> Result<ReducedDensityMatrix> {
    let n = input.read_u64::<LittleEndian>()? as usize;
    if n == 0 || n > 20 {
        return Err(GqdError::Format(format!("implausible site count {n}")));
    }
    let dim = 1usize << n;
    let mut m = CMat::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            let re = input.read_f64::<LittleEndian>()?;
            let im = input.read_f64::<LittleEndian>()?;
            m[(i, j)] = C64::new(re, im);
        }
    }
    ReducedDensityMatrix::new(n, m)
}
