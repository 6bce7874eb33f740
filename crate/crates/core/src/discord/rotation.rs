use std::f64::consts::{PI, TAU};

use nalgebra::Matrix2;

use crate::{GqdError, Result, C64};

/// Local measurement basis `R(θ, φ)`.
///
/// `theta` lives in `[0, π]` and `phi` in `[0, 2π)`. When `per_site` is set
/// it overrides the shared pair with one `(θ_j, φ_j)` per block site.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationAngles {
    pub theta: f64,
    pub phi: f64,
    pub per_site: Option<Vec<(f64, f64)>>,
}

impl RotationAngles {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) || !(0.0..TAU).contains(&phi) {
            return Err(GqdError::InvalidArgument(format!(
                "angles (θ={theta}, φ={phi}) outside [0, π] × [0, 2π)"
            )));
        }
        Ok(Self {
            theta,
            phi,
            per_site: None,
        })
    }

    /// Maps arbitrary real angles onto the canonical ranges without changing
    /// the measured diagonals.
    pub fn canonical(theta: f64, phi: f64) -> Self {
        let (theta, phi) = canonicalize(theta, phi);
        Self {
            theta,
            phi,
            per_site: None,
        }
    }

    pub fn with_per_site(mut self, angles: Vec<(f64, f64)>) -> Self {
        self.per_site = Some(angles.into_iter().map(|(t, p)| canonicalize(t, p)).collect());
        self
    }

    /// One rotation per block site.
    pub fn rotations(&self, n: usize) -> Result<Vec<Matrix2<C64>>> {
        match &self.per_site {
            Some(list) if list.len() != n => Err(GqdError::Dimension(format!(
                "{} per-site angle pairs for a {n}-site block",
                list.len()
            ))),
            Some(list) => Ok(list.iter().map(|&(t, p)| rotation_matrix(t, p)).collect()),
            None => Ok(vec![rotation_matrix(self.theta, self.phi); n]),
        }
    }
}

/// `R(θ, φ) = [[cos θ/2, sin θ/2 e^{−iφ}], [sin θ/2 e^{iφ}, −cos θ/2]]`.
///
/// Hermitian and unitary for every real input.
pub fn rotation_matrix(theta: f64, phi: f64) -> Matrix2<C64> {
    let (s, c) = (theta / 2.0).sin_cos();
    let e = C64::from_polar(1.0, phi);
    Matrix2::new(C64::new(c, 0.0), e.conj() * s, e * s, C64::new(-c, 0.0))
}

/// `R(θ + 2π, φ) = −R(θ, φ)` and `R(2π − θ, φ + π) = −R(θ, φ)`, so folding
/// onto the canonical ranges only changes global signs of the columns.
fn canonicalize(theta: f64, phi: f64) -> (f64, f64) {
    let mut theta = theta.rem_euclid(TAU);
    let mut phi = phi;
    if theta > PI {
        theta = TAU - theta;
        phi += PI;
    }
    let phi = phi.rem_euclid(TAU);
    (theta, if phi >= TAU { 0.0 } else { phi })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn close(a: &Matrix2<C64>, b: &Matrix2<C64>) -> bool {
        (a - b).norm() < 1e-15
    }

    #[test]
    fn special_angles() {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        assert!(close(&rotation_matrix(0.0, 0.0), &Matrix2::new(one, zero, zero, -one)));
        assert!(close(&rotation_matrix(PI, 0.0), &Matrix2::new(zero, one, one, zero)));
        let r = rotation_matrix(PI / 2.0, PI / 2.0);
        let h = FRAC_1_SQRT_2;
        let want = Matrix2::new(C64::new(h, 0.0), C64::new(0.0, -h), C64::new(0.0, h), C64::new(-h, 0.0));
        assert!(close(&r, &want));
    }

    #[test]
    fn hermitian_and_unitary() {
        for &(t, p) in &[(0.3, 1.1), (2.9, 5.0), (-1.0, 7.0)] {
            let r = rotation_matrix(t, p);
            assert!((r - r.adjoint()).norm() < 1e-15);
            assert!((r * r.adjoint() - Matrix2::identity()).norm() < 1e-15);
        }
    }

    #[test]
    fn canonical_ranges() {
        for &(t, p) in &[(-0.4, 0.2), (4.0, 6.0), (9.0, -3.0), (PI, TAU)] {
            let a = RotationAngles::canonical(t, p);
            assert!((0.0..=PI).contains(&a.theta), "{t} {p} -> {a:?}");
            assert!((0.0..TAU).contains(&a.phi), "{t} {p} -> {a:?}");
            let (r1, r2) = (rotation_matrix(t, p), rotation_matrix(a.theta, a.phi));
            assert!((r1 - r2).norm() < 1e-12 || (r1 + r2).norm() < 1e-12);
        }
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(RotationAngles::new(4.0, 0.0).is_err());
        assert!(RotationAngles::new(1.0, TAU).is_err());
    }
}
