use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gqd_core::linalg::{hermitian_eigenvalues, hermitian_eigh};
use gqd_core::models::{pfaffian, xxz_term, xy_block_rdm, xy_majorana_correlations, xy_term, XxzParams, XyParams};
use gqd_core::pauli::{identity, pauli, sigma_z, tensor_product, to_dense, two_site};
use gqd_core::rdm::validate_rdm;
use gqd_core::{CMat, C64};

fn expect(rho: &CMat, op: &CMat) -> f64 {
    (rho * op).trace().re
}

/// Nearest-neighbour observables of an open XY chain of `len` sites, taken
/// at the centre, from a real-space Bogoliubov treatment.
///
/// With Majoranas `m_{2j} = (Π_{l<j} σ^z_l) σ^x_j` and `m_{2j+1} = (Π_{l<j} σ^z_l) σ^y_j`
/// the chain is `H = (i/4) mᵀ K m`, and the ground state has
/// `⟨m_p m_q⟩ = δ_pq + sign(iK)_pq`.
struct FiniteChain {
    corr: CMat,
    centre: usize,
}

impl FiniteChain {
    fn new(gamma: f64, h: f64, len: usize) -> Self {
        let (a, b) = ((1.0 + gamma) / 2.0, (1.0 - gamma) / 2.0);
        let mut k = DMatrix::<f64>::zeros(2 * len, 2 * len);
        let mut set = |p: usize, q: usize, v: f64| {
            k[(p, q)] += v;
            k[(q, p)] -= v;
        };
        for j in 0..len {
            set(2 * j, 2 * j + 1, h);
            if j + 1 < len {
                set(2 * j + 1, 2 * j + 2, a);
                set(2 * j, 2 * j + 3, -b);
            }
        }
        let ik = k.map(|v| C64::new(0.0, v));
        let (values, vectors) = hermitian_eigh(&ik);
        let sign = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
            values.len(),
            values.iter().map(|v| C64::new(v.signum(), 0.0)),
        ));
        let corr = CMat::identity(2 * len, 2 * len) + &vectors * sign * vectors.adjoint();
        Self { corr, centre: len / 2 }
    }

    fn m(&self, p: usize, q: usize) -> C64 {
        self.corr[(2 * self.centre + p, 2 * self.centre + q)]
    }

    fn z(&self) -> f64 {
        (C64::new(0.0, -1.0) * self.m(0, 1)).re
    }

    fn xx(&self) -> f64 {
        (C64::new(0.0, -1.0) * self.m(1, 2)).re
    }

    fn yy(&self) -> f64 {
        (C64::new(0.0, 1.0) * self.m(0, 3)).re
    }

    fn zz(&self) -> f64 {
        let w = self.m(0, 1) * self.m(2, 3) - self.m(0, 2) * self.m(1, 3) + self.m(0, 3) * self.m(1, 2);
        -w.re
    }
}

#[test]
fn bond_terms() {
    let h = xxz_term(XxzParams { delta: 1.0 });
    let spectrum = hermitian_eigenvalues(&h);
    let want = [1.0, 1.0, 1.0, -3.0];
    assert!(spectrum.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-12), "{spectrum:?}");
    let ising = xy_term(XyParams { gamma: 1.0, field_h: 0.0 });
    assert!((ising + two_site(&pauli(1), &pauli(1)) * C64::new(0.5, 0.0)).norm() < 1e-14);
    let field = xy_term(XyParams { gamma: 0.3, field_h: 2.0 });
    assert!((&field - field.adjoint()).norm() < 1e-14);
    // The field is split evenly over the two sites of the bond.
    let z_part = (two_site(&sigma_z(), &identity()) + two_site(&identity(), &sigma_z())) * C64::new(-0.5, 0.0);
    let bare = xy_term(XyParams { gamma: 0.3, field_h: 0.0 });
    assert!((field - bare - z_part).norm() < 1e-14);
}

#[test]
fn critical_ising_matches_a_long_open_chain() {
    let params = XyParams { gamma: 1.0, field_h: 1.0 };
    let rho = xy_block_rdm(&xy_majorana_correlations(params, 2).unwrap()).unwrap();
    // Gapless, so the open ends shift the centre by O(1/L); cancel that term.
    let (long, short) = (FiniteChain::new(1.0, 1.0, 400), FiniteChain::new(1.0, 1.0, 200));
    let limit = |f: fn(&FiniteChain) -> f64| 2.0 * f(&long) - f(&short);
    let rho = rho.entries();
    let checks = [
        ("z", expect(rho, &two_site(&pauli(3), &identity())), limit(FiniteChain::z)),
        ("xx", expect(rho, &two_site(&pauli(1), &pauli(1))), limit(FiniteChain::xx)),
        ("yy", expect(rho, &two_site(&pauli(2), &pauli(2))), limit(FiniteChain::yy)),
        ("zz", expect(rho, &two_site(&pauli(3), &pauli(3))), limit(FiniteChain::zz)),
    ];
    for (name, exact, finite) in checks {
        assert!((exact - finite).abs() < 1e-3, "{name}: {exact} vs {finite}");
    }
    // Closed forms at the critical point.
    assert!((checks[0].1 - 2.0 / PI).abs() < 1e-8);
    assert!((checks[1].1 - 2.0 / PI).abs() < 1e-8);
}

#[test]
fn anisotropic_chain_matches_a_long_open_chain() {
    let params = XyParams { gamma: 0.4, field_h: 0.6 };
    let rho = xy_block_rdm(&xy_majorana_correlations(params, 2).unwrap()).unwrap();
    let chain = FiniteChain::new(0.4, 0.6, 400);
    let rho = rho.entries();
    assert!((expect(rho, &two_site(&pauli(3), &identity())) - chain.z()).abs() < 1e-6);
    assert!((expect(rho, &two_site(&pauli(1), &pauli(1))) - chain.xx()).abs() < 1e-6);
    assert!((expect(rho, &two_site(&pauli(2), &pauli(2))) - chain.yy()).abs() < 1e-6);
    assert!((expect(rho, &two_site(&pauli(3), &pauli(3))) - chain.zz()).abs() < 1e-6);
}

#[test]
fn xx_chain_at_zero_field() {
    let rho = xy_block_rdm(&xy_majorana_correlations(XyParams { gamma: 0.0, field_h: 0.0 }, 2).unwrap()).unwrap();
    let rho = rho.entries();
    assert!((expect(rho, &two_site(&pauli(1), &pauli(1))) - 2.0 / PI).abs() < 1e-8);
    assert!((expect(rho, &two_site(&pauli(2), &pauli(2))) - 2.0 / PI).abs() < 1e-8);
    assert!((expect(rho, &two_site(&pauli(3), &pauli(3))) + 4.0 / (PI * PI)).abs() < 1e-8);
    assert!(expect(rho, &two_site(&pauli(3), &identity())).abs() < 1e-10);
}

#[test]
fn strong_field_polarises() {
    let rho = xy_block_rdm(&xy_majorana_correlations(XyParams { gamma: 0.5, field_h: 50.0 }, 1).unwrap()).unwrap();
    assert!(expect(rho.entries(), &to_dense(&sigma_z())) > 0.999);
    // Above h = 1 the XX chain is fully polarised.
    let rho = xy_block_rdm(&xy_majorana_correlations(XyParams { gamma: 0.0, field_h: 1.3 }, 3).unwrap()).unwrap();
    let z = tensor_product(&[sigma_z(), identity(), identity()]);
    assert!((expect(rho.entries(), &z) - 1.0).abs() < 1e-10);
}

#[test]
fn blocks_are_consistent_states() {
    let params = XyParams { gamma: 0.7, field_h: 0.9 };
    let four = xy_block_rdm(&xy_majorana_correlations(params, 4).unwrap()).unwrap();
    let three = xy_block_rdm(&xy_majorana_correlations(params, 3).unwrap()).unwrap();
    assert!(validate_rdm(&four, 1e-10).passed());
    assert!((four.trace_out_last().unwrap().entries() - three.entries()).norm() < 1e-10);
    assert!((four.trace_out_first().unwrap().entries() - three.entries()).norm() < 1e-10);
    // The ground state has even parity Π σ^z, so odd-parity coherences vanish.
    for k in 0..16usize {
        for m in 0..16usize {
            if (k.count_ones() + m.count_ones()) % 2 == 1 {
                assert!(four.entries()[(k, m)].norm() < 1e-12);
            }
        }
    }
    assert!(xy_majorana_correlations(params, 8).is_err());
}

#[test]
fn pfaffian_examples() {
    let mut a = DMatrix::<f64>::zeros(4, 4);
    a[(0, 1)] = 2.0;
    a[(1, 0)] = -2.0;
    a[(2, 3)] = -3.0;
    a[(3, 2)] = 3.0;
    assert!((pfaffian(&a).unwrap() + 6.0).abs() < 1e-14);
    // Pf of the 4x4 general form: a01 a23 − a02 a13 + a03 a12.
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut b = DMatrix::<f64>::zeros(4, 4);
    for i in 0..4 {
        for j in i + 1..4 {
            let v = rng.random_range(-1.0..1.0);
            b[(i, j)] = v;
            b[(j, i)] = -v;
        }
    }
    let want = b[(0, 1)] * b[(2, 3)] - b[(0, 2)] * b[(1, 3)] + b[(0, 3)] * b[(1, 2)];
    assert!((pfaffian(&b).unwrap() - want).abs() < 1e-14);
    let mut c = DMatrix::<f64>::zeros(8, 8);
    for i in 0..8 {
        for j in i + 1..8 {
            let v = rng.random_range(-1.0..1.0);
            c[(i, j)] = v;
            c[(j, i)] = -v;
        }
    }
    let pf = pfaffian(&c).unwrap();
    assert!((pf * pf - c.determinant()).abs() < 1e-12);
    assert!(pfaffian(&DMatrix::<f64>::zeros(3, 3)).is_err());
    assert!(pfaffian(&(&c + DMatrix::<f64>::identity(8, 8))).is_err());
}
