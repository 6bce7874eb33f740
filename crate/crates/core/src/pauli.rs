//! Single-site operators in the `(down, up)` basis.

use nalgebra::Matrix2;

use crate::{CMat, C64};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity() -> Matrix2<C64> {
    Matrix2::identity()
}

pub fn sigma_x() -> Matrix2<C64> {
    Matrix2::new(c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.))
}

/// `σ^y` with `⟨down|σ^y|up⟩ = i`, so that `σ^x σ^y = i σ^z`.
pub fn sigma_y() -> Matrix2<C64> {
    Matrix2::new(c(0., 0.), c(0., 1.), c(0., -1.), c(0., 0.))
}

/// `σ^z = diag(-1, +1)`: spin-down is index 0.
pub fn sigma_z() -> Matrix2<C64> {
    Matrix2::new(c(-1., 0.), c(0., 0.), c(0., 0.), c(1., 0.))
}

/// Pauli matrix by index: 0 = I, 1 = X, 2 = Y, 3 = Z.
pub fn pauli(index: usize) -> Matrix2<C64> {
    match index {
        0 => identity(),
        1 => sigma_x(),
        2 => sigma_y(),
        3 => sigma_z(),
        _ => panic!("pauli index {index} out of range"),
    }
}

pub fn to_dense(m: &Matrix2<C64>) -> CMat {
    CMat::from_fn(2, 2, |i, j| m[(i, j)])
}

/// Two-site operator `a ⊗ b` as a 4×4 matrix (left site most significant).
pub fn two_site(a: &Matrix2<C64>, b: &Matrix2<C64>) -> CMat {
    to_dense(a).kronecker(&to_dense(b))
}

/// `⊗_j ops[j]` with the first operator on the most significant site.
pub fn tensor_product(ops: &[Matrix2<C64>]) -> CMat {
    ops.iter().fold(CMat::identity(1, 1), |acc, op| acc.kronecker(&to_dense(op)))
}
