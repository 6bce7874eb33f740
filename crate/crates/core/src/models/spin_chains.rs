use crate::pauli::{identity, sigma_x, sigma_y, sigma_z, two_site};
use crate::{CMat, C64};

/// XXZ chain `H = Σ σ^x σ^x + σ^y σ^y + Δ σ^z σ^z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XxzParams {
    pub delta: f64,
}

/// XY chain `H = −½ Σ [(1+γ)/2 σ^x σ^x + (1−γ)/2 σ^y σ^y + h σ^z]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XyParams {
    pub gamma: f64,
    pub field_h: f64,
}

pub fn xxz_term(params: XxzParams) -> CMat {
    two_site(&sigma_x(), &sigma_x())
        + two_site(&sigma_y(), &sigma_y())
        + two_site(&sigma_z(), &sigma_z()) * C64::new(params.delta, 0.0)
}

/// Bond term with the field split evenly between the two sites.
pub fn xy_term(params: XyParams) -> CMat {
    let a = (1.0 + params.gamma) / 2.0;
    let b = (1.0 - params.gamma) / 2.0;
    let h = params.field_h / 2.0;
    let bond = two_site(&sigma_x(), &sigma_x()) * C64::new(a, 0.0)
        + two_site(&sigma_y(), &sigma_y()) * C64::new(b, 0.0)
        + (two_site(&sigma_z(), &identity()) + two_site(&identity(), &sigma_z())) * C64::new(h, 0.0);
    bond * C64::new(-0.5, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_eigenvalues;

    #[test]
    fn xx_spectrum() {
        let ev = hermitian_eigenvalues(&xxz_term(XxzParams { delta: 0.0 }));
        let want = [2.0, 0.0, 0.0, -2.0];
        for (a, b) in ev.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn heisenberg_is_su2_symmetric() {
        let h = xxz_term(XxzParams { delta: 1.0 });
        let sz = two_site(&sigma_z(), &identity()) + two_site(&identity(), &sigma_z());
        let sx = two_site(&sigma_x(), &identity()) + two_site(&identity(), &sigma_x());
        assert!((&h * &sz - &sz * &h).norm() < 1e-14);
        assert!((&h * &sx - &sx * &h).norm() < 1e-14);
    }

    #[test]
    fn ising_sector() {
        let h = xxz_term(XxzParams { delta: 0.7 });
        // |↑↑⟩ is basis index 3.
        assert!((h[(3, 3)] - C64::new(0.7, 0.0)).norm() < 1e-15);
        assert!(h.column(3).iter().take(3).all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn xy_limits() {
        let ising = xy_term(XyParams { gamma: 1.0, field_h: 0.0 });
        assert!((ising - two_site(&sigma_x(), &sigma_x()) * C64::new(-0.5, 0.0)).norm() < 1e-15);
        let xx = xy_term(XyParams { gamma: 0.0, field_h: 0.0 });
        let want = (two_site(&sigma_x(), &sigma_x()) + two_site(&sigma_y(), &sigma_y())) * C64::new(-0.25, 0.0);
        assert!((xx - want).norm() < 1e-15);
        // Field on |↑↑⟩: −½ · (h/2) · 2 = −h/2.
        let h = xy_term(XyParams { gamma: 1.0, field_h: 2.0 });
        assert!((h[(3, 3)] - C64::new(-1.0, 0.0)).norm() < 1e-15);
    }
}
