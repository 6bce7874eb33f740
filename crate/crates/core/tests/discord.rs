use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::Matrix2;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gqd_core::discord::{
    campbell_objective, channel_matrices, measured_block_diagonals, measured_site_diagonal, minimize_gqd,
    minimize_gqd_dense, rotation_matrix, truncated_block_entropy, von_neumann_entropy, GqdConfig, RotationAngles,
    TruncationOptions,
};
use gqd_core::discord::entropy::truncated_block_entropy_at;
use gqd_core::models::{three_body_mps, ThreeBodyParams};
use gqd_core::mps::{EigenOptions, InfiniteMps, SiteTensorSet};
use gqd_core::oracle::{brute_force_gqd, dense_measured_diagonals, pure_state};
use gqd_core::pauli::{sigma_x, sigma_y, sigma_z, tensor_product, to_dense};
use gqd_core::rdm::{block_rdm, block_rdm_at, ReducedDensityMatrix};
use gqd_core::{CMat, C64};

mod common;
use common::ghz;

fn shannon(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum()
}

fn random_unitary(rng: &mut ChaCha8Rng) -> Matrix2<C64> {
    let (a, b, c) = (rng.random_range(0.0..PI), rng.random_range(0.0..2.0 * PI), rng.random_range(0.0..2.0 * PI));
    let (s, co) = (a / 2.0).sin_cos();
    Matrix2::new(
        C64::from_polar(co, b),
        C64::from_polar(-s, c),
        C64::from_polar(s, -c),
        C64::from_polar(co, -b),
    )
}

fn random_cell(d: usize, seed: u64) -> SiteTensorSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = || CMat::from_fn(d, d, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    SiteTensorSet::new(vec![[m(), m()], [m(), m()]]).unwrap()
}

fn werner(p: f64) -> ReducedDensityMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let singlet = pure_state(&[0.0, s, -s, 0.0].map(|x| C64::new(x, 0.0))).unwrap();
    let m = singlet.entries() * C64::new(p, 0.0) + CMat::identity(4, 4) * C64::new((1.0 - p) / 4.0, 0.0);
    ReducedDensityMatrix::new(2, m).unwrap()
}

/// Werner states are isotropic, so every basis is optimal:
/// `G = H(ρ̃) − S(ρ)` with both marginals maximally mixed.
fn werner_discord(p: f64) -> f64 {
    let measured = [(1.0 - p) / 4.0, (1.0 + p) / 4.0, (1.0 + p) / 4.0, (1.0 - p) / 4.0];
    let spectrum = [(1.0 + 3.0 * p) / 4.0, (1.0 - p) / 4.0, (1.0 - p) / 4.0, (1.0 - p) / 4.0];
    shannon(&measured) - shannon(&spectrum)
}

#[test]
fn rotation_examples() {
    let r0 = rotation_matrix(0.0, 0.0);
    assert!((r0 + sigma_z()).norm() < 1e-15);
    let rx = rotation_matrix(PI, 0.0);
    assert!((rx - sigma_x()).norm() < 1e-15);
    let ry = rotation_matrix(PI, FRAC_PI_2);
    assert!((ry + sigma_y()).norm() < 1e-15);
    for (t, p) in [(0.3, 1.1), (2.9, 5.0)] {
        let r = rotation_matrix(t, p);
        assert!((r * r.adjoint() - Matrix2::identity()).norm() < 1e-14);
        assert!((r - r.adjoint()).norm() < 1e-14);
    }
    assert!(RotationAngles::new(3.5, 0.0).is_err());
    assert!(RotationAngles::new(1.0, 7.0).is_err());
    let c = RotationAngles::canonical(2.0 * PI - 0.4, 0.2);
    assert!((c.theta - 0.4).abs() < 1e-12 && (c.phi - (0.2 + PI)).abs() < 1e-12);
}

#[test]
fn site_diagonals_in_three_bases() {
    let mps = three_body_mps(ThreeBodyParams { g: 1.0 }).unwrap();
    let at = |t: f64, p: f64| {
        let angles = RotationAngles::new(t, p).unwrap();
        measured_site_diagonal(&channel_matrices(&mps.tensors, &angles), &mps, 0).unwrap()
    };
    let z = at(0.0, 0.0);
    assert!((z[0] - 0.5).abs() < 1e-10 && (z[1] - 0.5).abs() < 1e-10);
    let x = at(FRAC_PI_2, 0.0);
    assert!((x[0] - 1.0).abs() < 1e-10 && x[1].abs() < 1e-10, "{x:?}");
    let y = at(FRAC_PI_2, FRAC_PI_2);
    assert!((y[0] - 0.5).abs() < 1e-10);
}

#[test]
fn two_site_cells_match_dense_diagonals() {
    let tensors = random_cell(3, 17);
    let mps = InfiniteMps::new(&tensors, &EigenOptions::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in 1..=5 {
        let rho = block_rdm_at(&mps.tensors, &mps.fixed_point, 0, n, n).unwrap();
        for _ in 0..5 {
            let angles = RotationAngles::new(rng.random_range(0.0..PI), rng.random_range(0.0..2.0 * PI)).unwrap();
            let fast = measured_block_diagonals(&channel_matrices(&mps.tensors, &angles), &mps, n).unwrap();
            let dense = dense_measured_diagonals(&rho, &angles).unwrap();
            let err = fast.iter().zip(&dense).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err < 1e-12, "n={n}: {err:.3e}");
        }
    }
}

#[test]
fn ten_site_diagonals_are_complete() {
    let mps = three_body_mps(ThreeBodyParams { g: 0.5 }).unwrap();
    let angles = RotationAngles::new(1.0, 2.0).unwrap();
    let p = measured_block_diagonals(&channel_matrices(&mps.tensors, &angles), &mps, 10).unwrap();
    assert_eq!(p.len(), 1024);
    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!(p.iter().all(|&x| x >= 0.0));
}

#[test]
fn truncated_entropy_matches_dense_and_is_stable_in_tau() {
    let mps = three_body_mps(ThreeBodyParams { g: 0.5 }).unwrap();
    let dense = von_neumann_entropy(&block_rdm(&mps.tensors, &mps.fixed_point, 10).unwrap());
    let t = truncated_block_entropy(&mps.tensors, &mps.fixed_point, 10, 16).unwrap();
    assert!((t.entropy - dense).abs() < 1e-9, "{} vs {dense}", t.entropy);
    assert!(t.warnings.is_empty());
    let doubled = truncated_block_entropy(&mps.tensors, &mps.fixed_point, 10, 32).unwrap();
    assert!((doubled.entropy - t.entropy).abs() < 1e-12);
    // A bond dimension of two caps the block entropy at two bits.
    assert!(t.entropy <= 2.0 + 1e-12);
}

#[test]
fn tight_truncation_fails_loudly() {
    let mps = three_body_mps(ThreeBodyParams { g: -1.0 }).unwrap();
    let opts = TruncationOptions {
        tau: 2,
        ..TruncationOptions::default()
    };
    assert!(truncated_block_entropy_at(&mps.tensors, &mps.fixed_point, 0, 8, &opts).is_err());
}

#[test]
fn angle_dependent_part_matches_dense() {
    let mps = three_body_mps(ThreeBodyParams { g: -0.3 }).unwrap();
    let rho = block_rdm(&mps.tensors, &mps.fixed_point, 4).unwrap();
    let angles = RotationAngles::new(0.7, 4.0).unwrap();
    let block = shannon(&dense_measured_diagonals(&rho, &angles).unwrap());
    let site = ReducedDensityMatrix::new(1, block_rdm(&mps.tensors, &mps.fixed_point, 1).unwrap().into_entries()).unwrap();
    let site_h = shannon(&dense_measured_diagonals(&site, &angles).unwrap());
    let want = block - 4.0 * site_h;
    let got = campbell_objective(&mps, 4, &angles).unwrap();
    assert!((got - want).abs() < 1e-12, "{got} vs {want}");
}

#[test]
fn werner_states_have_closed_form_discord() {
    let config = GqdConfig::default();
    for p in [0.0, 0.2, 0.5, 0.8, 1.0] {
        let r = brute_force_gqd(&werner(p), &config).unwrap();
        let want = werner_discord(p);
        assert!((r.value - want).abs() < 1e-8, "p={p}: {} vs {want}", r.value);
    }
    // The singlet: two bits of mutual information, one of them classical.
    assert!((werner_discord(1.0) - 1.0).abs() < 1e-12);
}

#[test]
fn reference_values() {
    let config = GqdConfig::default();
    for n in 2..=4 {
        let rho = ReducedDensityMatrix::new(n, ghz(n)).unwrap();
        let r = minimize_gqd_dense(&rho, &config).unwrap();
        assert!((r.value - 1.0).abs() < 1e-8, "GHZ_{n}: {}", r.value);
    }
    let cluster = three_body_mps(ThreeBodyParams { g: -1.0 }).unwrap();
    assert!(minimize_gqd(&cluster, 2, &config).unwrap().value < 1e-8);
    let g3 = minimize_gqd(&cluster, 3, &config).unwrap().value;
    assert!((g3 - 0.890325).abs() < 1e-6, "{g3}");
    let half = three_body_mps(ThreeBodyParams { g: 0.5 }).unwrap();
    let g2 = minimize_gqd(&half, 2, &config).unwrap().value;
    assert!((g2 - 0.1682571371).abs() < 1e-8, "{g2}");
}

#[test]
fn terms_recompose_the_value() {
    let mps = three_body_mps(ThreeBodyParams { g: -0.5 }).unwrap();
    let r = minimize_gqd(&mps, 5, &GqdConfig::default()).unwrap();
    assert!((r.terms.value() - r.raw_value).abs() < 1e-12);
    assert!(r.value >= 0.0 && r.converged);
    let at = campbell_objective(&mps, 5, &r.angles).unwrap();
    assert!((at - r.terms.angle_part()).abs() < 1e-10);
}

#[test]
fn per_site_refinement_never_does_worse() {
    let mps = three_body_mps(ThreeBodyParams { g: -0.5 }).unwrap();
    let config = GqdConfig {
        per_site: true,
        ..GqdConfig::default()
    };
    let r = minimize_gqd(&mps, 3, &config).unwrap();
    let per_site = r.per_site.expect("refinement requested");
    assert!(per_site.value <= r.value + 1e-10);
}

#[test]
fn uniform_local_unitaries_leave_discord_unchanged() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let config = GqdConfig::default();
    let mut amps: Vec<C64> = (0..8).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    amps.iter_mut().for_each(|z| *z /= norm);
    let rho = pure_state(&amps).unwrap();
    // One basis is shared by all sites, so only U ⊗ U ⊗ U is a symmetry.
    let v = random_unitary(&mut rng);
    let u = tensor_product(&[v, v, v]);
    let rotated = ReducedDensityMatrix::new(3, &u * rho.entries() * u.adjoint()).unwrap();
    let a = brute_force_gqd(&rho, &config).unwrap().value;
    let b = brute_force_gqd(&rotated, &config).unwrap().value;
    assert!(a > 0.1);
    assert!((a - b).abs() < 1e-6, "{a} vs {b}");
}

#[test]
fn dense_state_matches_oracle_on_a_z_mixture() {
    // Classical mixture in the z basis: no discord.
    let up = to_dense(&(Matrix2::identity() + sigma_z())) * C64::new(0.5, 0.0);
    let down = to_dense(&(Matrix2::identity() - sigma_z())) * C64::new(0.5, 0.0);
    let m = up.kronecker(&down) * C64::new(0.3, 0.0) + down.kronecker(&up) * C64::new(0.7, 0.0);
    let rho = ReducedDensityMatrix::new(2, m).unwrap();
    assert!(minimize_gqd_dense(&rho, &GqdConfig::default()).unwrap().value < 1e-8);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn measured_diagonals_form_a_distribution(theta in 0.0..PI, phi in 0.0..(2.0 * PI), n in 1usize..=6) {
        let mps = three_body_mps(ThreeBodyParams { g: -0.7 }).unwrap();
        let angles = RotationAngles::new(theta, phi).unwrap();
        let p = measured_block_diagonals(&channel_matrices(&mps.tensors, &angles), &mps, n).unwrap();
        prop_assert_eq!(p.len(), 1 << n);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(p.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn werner_formula_holds(p in 0.0f64..1.0) {
        let config = GqdConfig { grid_theta: 9, grid_phi: 9, ..GqdConfig::default() };
        let r = minimize_gqd_dense(&werner(p), &config).unwrap();
        prop_assert!((r.value - werner_discord(p)).abs() < 1e-8);
    }
}
