//! Small dense linear-algebra helpers shared by the numerical modules.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::{CMat, CVec, C64};

/// Eigenvalues below zero but above this are treated as round-off and clipped.
pub const PSD_CLIP: f64 = 1e-9;

/// Eigen-decomposition of a Hermitian matrix, eigenvalues in descending order.
///
/// Only the Hermitian part `(a + a†)/2` is used.
pub fn hermitian_eigh(a: &CMat) -> (Vec<f64>, CMat) {
    let eig = robust_eigen(hermitian_part(a));
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let n = a.nrows();
    let vectors = CMat::from_fn(n, order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Eigenvalues of a Hermitian matrix in descending order.
pub fn hermitian_eigenvalues(a: &CMat) -> Vec<f64> {
    let mut v: Vec<f64> = robust_eigen(hermitian_part(a)).eigenvalues.iter().copied().collect();
    v.sort_by(|x, y| y.total_cmp(x));
    v
}

/// The implicit QR sweep in nalgebra occasionally returns infinities for
/// nearly diagonal complex input with entries near 1e-32. A shift by a
/// multiple of the identity changes the iteration without changing the
/// eigenvectors, so retry with a few shifts before giving up.
fn robust_eigen(h: CMat) -> SymmetricEigen<C64, nalgebra::Dyn> {
    let finite = |e: &SymmetricEigen<C64, nalgebra::Dyn>| {
        e.eigenvalues.iter().all(|v| v.is_finite()) && e.eigenvectors.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    };
    let eig = SymmetricEigen::new(h.clone());
    if finite(&eig) {
        return eig;
    }
    let n = h.nrows();
    let scale = h.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    for factor in [1.0, 0.7548776662, 2.2360679775] {
        let shift = factor * scale;
        let mut e = SymmetricEigen::new(&h + CMat::identity(n, n) * C64::new(shift, 0.0));
        if finite(&e) {
            e.eigenvalues.iter_mut().for_each(|v| *v -= shift);
            return e;
        }
    }
    eig
}

pub fn hermitian_part(a: &CMat) -> CMat {
    (a + a.adjoint()) * C64::new(0.5, 0.0)
}

/// `-Σ p log₂ p` with `0 log 0 = 0`; negative entries are treated as zero.
pub fn shannon_entropy(probabilities: &[f64]) -> f64 {
    probabilities.iter().map(|&p| plogp(p)).sum::<f64>()
}

/// `-p log₂ p`, zero for `p <= 0`.
#[inline]
pub fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

/// Entropy in bits of a spectrum after clipping tiny negative eigenvalues.
pub fn spectrum_entropy(eigenvalues: &[f64]) -> f64 {
    eigenvalues
        .iter()
        .map(|&x| if x < 0.0 && x >= -PSD_CLIP { 0.0 } else { x })
        .map(plogp)
        .sum()
}

/// Reshape a `D²` vector into a `D×D` matrix, `m[(a, b)] = v[a·D + b]`.
pub fn vec_to_mat(v: &CVec, d: usize) -> CMat {
    CMat::from_fn(d, d, |a, b| v[a * d + b])
}

/// Inverse of [`vec_to_mat`].
pub fn mat_to_vec(m: &CMat) -> CVec {
    let d = m.nrows();
    CVec::from_fn(d * m.ncols(), |i, _| m[(i / d, i % d)])
}

/// Bilinear (not sesquilinear) pairing `Σ_ab x_ab y_ab`.
pub fn bilinear(x: &CMat, y: &CMat) -> C64 {
    x.iter().zip(y.iter()).map(|(a, b)| a * b).sum()
}

/// Frobenius inner product `Σ_ab conj(x_ab) y_ab`.
pub fn frobenius(x: &CMat, y: &CMat) -> C64 {
    x.iter().zip(y.iter()).map(|(a, b)| a.conj() * b).sum()
}

pub fn real_to_complex(m: &DMatrix<f64>) -> CMat {
    m.map(|x| C64::new(x, 0.0))
}

/// Largest entry-wise modulus.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_vec(v: &DVector<C64>) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
