//! Imaginary-time evolution of a two-site unit cell (iTEBD).
//!
//! The state is kept in Vidal form `⋯ λ_B Γ_A λ_A Γ_B λ_B Γ_A ⋯`. Each step
//! is a symmetric split `e^{−dt h_AB/2} e^{−dt h_BA} e^{−dt h_AB/2}`; every
//! gate is followed by an SVD truncated to the bond dimension. The canonical
//! form is restored exactly before each energy check.

use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use log::{debug, info, warn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{hermitian_eigh, hermitian_part, max_abs};
use crate::mps::SiteTensorSet;
use crate::{CMat, CVec, GqdError, Result, C64};

/// Singular values below this are treated as exact zeros and dropped.
pub const SINGULAR_VALUE_FLOOR: f64 = 1e-14;

const CHECKPOINT_MAGIC: &[u8; 8] = b"GQDITEBD";
const CHECKPOINT_VERSION: u32 = 1;

/// Vidal-form two-site unit cell.
///
/// `gamma[0][s]` is `Γ_A^s` with shape `len(λ_B) × len(λ_A)`, `gamma[1][s]`
/// is `Γ_B^s` with shape `len(λ_A) × len(λ_B)`. `lambda[0]` sits on the bond
/// right of A, `lambda[1]` on the bond right of B.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalUnitCell {
    pub gamma: [[CMat; 2]; 2],
    pub lambda: [Vec<f64>; 2],
}

impl CanonicalUnitCell {
    /// Product state with the same single-site state on every site.
    pub fn product(site: [C64; 2]) -> Self {
        let g = |z: C64| CMat::from_element(1, 1, z);
        Self {
            gamma: [[g(site[0]), g(site[1])], [g(site[0]), g(site[1])]],
            lambda: [vec![1.0], vec![1.0]],
        }
    }

    pub fn bond_dimensions(&self) -> [usize; 2] {
        [self.lambda[0].len(), self.lambda[1].len()]
    }

    /// Two-site tensor on the bond starting at `position` (0 = A-B, 1 = B-A),
    /// as a `2·Dl × 2·Dr` matrix with rows `s₁·Dl + α` and columns `s₂·Dr + β`.
    pub fn theta(&self, position: usize) -> CMat {
        let (x, y) = (position % 2, (position + 1) % 2);
        let outer = &self.lambda[y];
        let center = &self.lambda[x];
        let (dl, dr) = (outer.len(), outer.len());
        let mut theta = CMat::zeros(2 * dl, 2 * dr);
        for s1 in 0..2 {
            let left = scale_rows(&scale_cols(&self.gamma[x][s1], center), outer);
            for s2 in 0..2 {
                let block = &left * scale_cols(&self.gamma[y][s2], outer);
                theta.view_mut((s1 * dl, s2 * dr), (dl, dr)).copy_from(&block);
            }
        }
        theta
    }

    /// Single-site state of A (`position = 0`) or B (`position = 1`) from the
    /// canonical form directly.
    pub fn site_rdm(&self, position: usize) -> CMat {
        let x = position % 2;
        let x_mats: Vec<CMat> = (0..2)
            .map(|s| scale_cols(&scale_rows(&self.gamma[x][s], &self.lambda[1 - x]), &self.lambda[x]))
            .collect();
        let rho = CMat::from_fn(2, 2, |s, t| crate::linalg::frobenius(&x_mats[t], &x_mats[s]));
        let tr = rho.trace();
        rho / tr
    }

    /// Two-site state on the bond starting at `position`, from the canonical form.
    pub fn two_site_rdm(&self, position: usize) -> CMat {
        let theta = self.theta(position);
        let dl = theta.nrows() / 2;
        let dr = theta.ncols() / 2;
        let psi = |s1: usize, s2: usize| theta.view((s1 * dl, s2 * dr), (dl, dr)).into_owned();
        let blocks: Vec<CMat> = (0..4).map(|k| psi(k / 2, k % 2)).collect();
        let rho = CMat::from_fn(4, 4, |k, m| crate::linalg::frobenius(&blocks[m], &blocks[k]));
        let tr = rho.trace();
        rho / tr
    }

    /// Largest deviation from the left and right orthonormality conditions.
    pub fn canonical_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for x in 0..2 {
            let lam_left = &self.lambda[1 - x];
            let lam_right = &self.lambda[x];
            let left = (0..2)
                .map(|s| {
                    let a = scale_rows(&self.gamma[x][s], lam_left);
                    a.adjoint() * a
                })
                .fold(CMat::zeros(lam_right.len(), lam_right.len()), |acc, m| acc + m);
            let right = (0..2)
                .map(|s| {
                    let b = scale_cols(&self.gamma[x][s], lam_right);
                    &b * b.adjoint()
                })
                .fold(CMat::zeros(lam_left.len(), lam_left.len()), |acc, m| acc + m);
            let id_r = CMat::identity(lam_right.len(), lam_right.len());
            let id_l = CMat::identity(lam_left.len(), lam_left.len());
            worst = worst.max(max_abs(&(left - id_r))).max(max_abs(&(right - id_l)));
        }
        worst
    }
}

impl CanonicalUnitCell {
    /// Restores exact canonical form without changing the physical state.
    ///
    /// Non-unitary gates leave the Vidal form only approximately canonical,
    /// which biases every quantity read off from it. The fixed points
    /// `V_L = Y†Y`, `V_R = XX†` of the cell transfer matrix give the new
    /// bond weights as the singular values of `YX`; the cell is then split
    /// again with an exact SVD.
    pub fn canonicalize(&self) -> Result<CanonicalUnitCell> {
        let db = self.lambda[1].len();
        let m: [[CMat; 2]; 2] = [0, 1].map(|x| [0, 1].map(|s| scale_cols(&self.gamma[x][s], &self.lambda[x])));
        // In exact canonical form the fixed points are `λ_B²` and the identity.
        let lam_sq = CVec::from_iterator(db, self.lambda[1].iter().map(|v| C64::new(v * v, 0.0)));
        let v_left = fixed_point(CMat::from_diagonal(&lam_sq), |v| {
            let da = m[0][0].ncols();
            let v = m[0].iter().map(|a| a.adjoint() * v * a).fold(CMat::zeros(da, da), |acc, t| acc + t);
            m[1].iter().map(|b| b.adjoint() * &v * b).fold(CMat::zeros(db, db), |acc, t| acc + t)
        })?;
        let v_right = fixed_point(CMat::identity(db, db), |v| {
            let v = m[1].iter().map(|b| b * v * b.adjoint()).fold(CMat::zeros(b_rows(&m), b_rows(&m)), |acc, t| acc + t);
            m[0].iter().map(|a| a * &v * a.adjoint()).fold(CMat::zeros(db, db), |acc, t| acc + t)
        })?;
        let y = psd_sqrt(&v_left);
        let x = psd_sqrt(&v_right);

        let svd = (&y * &x).svd(true, true);
        let w = svd.u.expect("requested U");
        let z = svd.v_t.expect("requested V†");
        let order = sorted_indices(&svd.singular_values);
        let top = svd.singular_values[order[0]];
        let keep: Vec<usize> = order
            .into_iter()
            .filter(|&i| svd.singular_values[i] > SINGULAR_VALUE_FLOOR * top)
            .collect();
        let chi = keep.len();
        let norm = keep.iter().map(|&i| svd.singular_values[i].powi(2)).sum::<f64>().sqrt();
        let outer: Vec<f64> = keep.iter().map(|&i| svd.singular_values[i] / norm).collect();
        let w_adj = CMat::from_fn(chi, db, |c, a| w[(a, keep[c])].conj());
        let z_adj = CMat::from_fn(db, chi, |a, c| z[(keep[c], a)].conj());

        // λ' Γ' λ' = W† Y N X Z† for each pair of physical indices.
        let left = &w_adj * &y;
        let right = &x * &z_adj;
        let mut theta = CMat::zeros(2 * chi, 2 * chi);
        for s1 in 0..2 {
            let a = &left * &m[0][s1];
            for s2 in 0..2 {
                let blk = &a * &m[1][s2] * &right;
                theta.view_mut((s1 * chi, s2 * chi), (chi, chi)).copy_from(&blk);
            }
        }
        let mut out = CanonicalUnitCell {
            gamma: [
                [CMat::zeros(chi, 0), CMat::zeros(chi, 0)],
                [CMat::zeros(0, chi), CMat::zeros(0, chi)],
            ],
            lambda: [Vec::new(), outer],
        };
        out.split_bond(&theta, 0, usize::MAX);
        Ok(out)
    }
}

fn sorted_indices(values: &nalgebra::DVector<f64>) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    order
}

fn b_rows(m: &[[CMat; 2]; 2]) -> usize {
    m[1][0].nrows()
}

const FIXED_POINT_TOL: f64 = 1e-14;
const FIXED_POINT_MAX_ITER: usize = 100_000;

/// Power iteration for the dominant Hermitian fixed point of a completely
/// positive map, normalised to unit trace.
fn fixed_point<F: Fn(&CMat) -> CMat>(start: CMat, map: F) -> Result<CMat> {
    let normalize = |v: CMat| {
        let tr = v.trace();
        hermitian_part(&(v / tr))
    };
    let mut v = normalize(start);
    for _ in 0..FIXED_POINT_MAX_ITER {
        let next = normalize(map(&v));
        let change = max_abs(&(&next - &v));
        v = next;
        if change < FIXED_POINT_TOL {
            return Ok(v);
        }
    }
    Err(GqdError::Eigensolver("fixed point of the cell transfer map did not converge".into()))
}

/// Hermitian square root of a positive semidefinite matrix; negative
/// eigenvalues from rounding are clipped.
fn psd_sqrt(m: &CMat) -> CMat {
    let (values, vectors) = hermitian_eigh(m);
    let roots = CVec::from_iterator(values.len(), values.iter().map(|v| C64::new(v.max(0.0).sqrt(), 0.0)));
    &vectors * CMat::from_diagonal(&roots) * vectors.adjoint()
}

fn scale_rows(m: &CMat, s: &[f64]) -> CMat {
    let mut out = m.clone();
    for (i, &v) in s.iter().enumerate() {
        out.row_mut(i).scale_mut(v);
    }
    out
}

fn scale_cols(m: &CMat, s: &[f64]) -> CMat {
    let mut out = m.clone();
    for (j, &v) in s.iter().enumerate() {
        out.column_mut(j).scale_mut(v);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrotterStage {
    pub dt: f64,
    pub max_steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrotterSchedule {
    pub stages: Vec<TrotterStage>,
    /// Steps between energy checks.
    pub window: usize,
    /// A stage ends once the energy changes by less than this over one window.
    pub threshold: f64,
}

impl TrotterSchedule {
    pub fn new(stages: Vec<TrotterStage>, window: usize, threshold: f64) -> Result<Self> {
        if stages.is_empty() || window == 0 || threshold <= 0.0 {
            return Err(GqdError::InvalidArgument(
                "schedule needs at least one stage, a positive window and a positive threshold".into(),
            ));
        }
        if stages.iter().any(|s| s.dt <= 0.0 || s.max_steps == 0) {
            return Err(GqdError::InvalidArgument("time steps and step counts must be positive".into()));
        }
        if stages.windows(2).any(|w| w[1].dt >= w[0].dt) {
            return Err(GqdError::InvalidArgument("time steps must strictly decrease".into()));
        }
        Ok(Self {
            stages,
            window,
            threshold,
        })
    }

    /// Compact textual form, used for cache keys.
    pub fn describe(&self) -> String {
        let stages: Vec<String> = self
            .stages
            .iter()
            .map(|s| format!("{:e}x{}", s.dt, s.max_steps))
            .collect();
        format!("{};window={};threshold={:e}", stages.join(","), self.window, self.threshold)
    }
}

impl Default for TrotterSchedule {
    fn default() -> Self {
        let stages = [0.1, 0.01, 1e-3, 1e-4, 1e-5]
            .iter()
            .map(|&dt| TrotterStage { dt, max_steps: 10_000 })
            .collect();
        Self {
            stages,
            window: 100,
            threshold: 1e-10,
        }
    }
}

/// `exp(−dt·h)` for a Hermitian two-site term.
pub fn two_site_gate(h: &CMat, dt: f64) -> Result<CMat> {
    if h.nrows() != 4 || h.ncols() != 4 {
        return Err(GqdError::Dimension(format!(
            "two-site term must be 4x4, got {}x{}",
            h.nrows(),
            h.ncols()
        )));
    }
    let (values, vectors) = hermitian_eigh(h);
    let exp = CVec::from_iterator(4, values.iter().map(|v| C64::new((-dt * v).exp(), 0.0)));
    Ok(&vectors * CMat::from_diagonal(&exp) * vectors.adjoint())
}

/// Allowed rise of the stage-end energy before a stage is discarded.
const STAGE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct GroundState {
    pub state: CanonicalUnitCell,
    pub energy: f64,
    /// Energy after every window, across all stages.
    pub energy_trace: Vec<f64>,
    /// Energy at the end of each stage.
    pub stage_energies: Vec<f64>,
    /// Whether each stage met the window threshold before its step budget.
    pub stages_converged: Vec<bool>,
    /// `(dt, energy)` of a stage that ended above its predecessor. The
    /// evolution stops there and keeps the preceding state.
    pub discarded_stages: Vec<(f64, f64)>,
}

/// Imaginary-time evolution from a seeded random state.
///
/// Stages that exhaust their step budget hand over to the next, smaller
/// step; only a final stage that does not settle is an error. A stage that
/// ends above the previous stage energy is discarded and ends the run.
pub fn ground_state(h: &CMat, d: usize, schedule: &TrotterSchedule, seed: u64) -> Result<GroundState> {
    if d < 2 {
        return Err(GqdError::InvalidArgument(format!("bond dimension must be at least 2, got {d}")));
    }
    let h = hermitian_part(h);
    let mut state = random_state(d, seed);
    let mut energy_trace = Vec::new();
    let mut stages_converged = Vec::new();
    let mut stage_energies = Vec::new();
    let mut energy = energy_per_site(&state, &h);
    let mut best: Option<(CanonicalUnitCell, f64)> = None;
    let mut discarded_stages = Vec::new();

    for stage in &schedule.stages {
        let gate = two_site_gate(&h, stage.dt)?;
        let half = two_site_gate(&h, stage.dt / 2.0)?;
        let mut converged = false;
        let mut steps = 0;
        while steps < stage.max_steps {
            let chunk = schedule.window.min(stage.max_steps - steps);
            // Second-order splitting: consecutive half steps on bond 0 are merged.
            update_bond(&mut state, &half, 0, d);
            for k in 0..chunk {
                update_bond(&mut state, &gate, 1, d);
                update_bond(&mut state, if k + 1 == chunk { &half } else { &gate }, 0, d);
            }
            steps += chunk;
            match state.canonicalize() {
                Ok(c) => state = c,
                Err(e) => warn!("canonicalization skipped: {e}"),
            }
            let e = energy_per_site(&state, &h);
            if !e.is_finite() {
                return Err(GqdError::Numerical("energy became non-finite".into()));
            }
            energy_trace.push(e);
            let change = (e - energy).abs();
            energy = e;
            if change < schedule.threshold {
                converged = true;
                break;
            }
        }
        debug!("iTEBD stage dt={:e}: {steps} steps, energy {energy:.12}, converged={converged}", stage.dt);
        if let Some((best_state, best_energy)) = &best {
            if energy > best_energy + STAGE_TOLERANCE {
                // Truncation error, which grows as dt shrinks, now outweighs
                // the Trotter error; later stages cannot help either.
                info!(
                    "iTEBD stage dt={:e} raised the energy by {:.3e}; keeping the previous stage",
                    stage.dt,
                    energy - best_energy
                );
                discarded_stages.push((stage.dt, energy));
                state = best_state.clone();
                energy = *best_energy;
                break;
            }
        }
        stages_converged.push(converged);
        stage_energies.push(energy);
        best = Some((state.clone(), energy));
    }
    info!("iTEBD finished with energy per site {energy:.12}");
    if !stages_converged.last().copied().unwrap_or(false) {
        let tail = energy_trace.iter().rev().take(10).rev().copied().collect();
        return Err(GqdError::NotConverged { energies: tail });
    }
    Ok(GroundState {
        state,
        energy,
        energy_trace,
        stage_energies,
        stages_converged,
        discarded_stages,
    })
}

/// Complex Gaussian tensors. Real starting points of real Hamiltonians can
/// flow into superpositions with pairwise degenerate Schmidt spectra, which
/// waste half of the bond dimension.
fn random_state(d: usize, seed: u64) -> CanonicalUnitCell {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gaussian = |_: usize, _: usize| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        C64::new(re, im)
    };
    let mut mats = Vec::with_capacity(4);
    for _ in 0..4 {
        mats.push(CMat::from_fn(d, d, &mut gaussian));
    }
    let flat = vec![1.0 / (d as f64).sqrt(); d];
    let mut it = mats.into_iter();
    let mut next = || it.next().expect("four matrices");
    CanonicalUnitCell {
        gamma: [[next(), next()], [next(), next()]],
        lambda: [flat.clone(), flat],
    }
}

fn update_bond(state: &mut CanonicalUnitCell, gate: &CMat, position: usize, d: usize) {
    let theta = state.theta(position);
    let dl = theta.nrows() / 2;
    let dr = theta.ncols() / 2;

    // Apply the gate to the physical indices.
    let mut evolved = CMat::zeros(2 * dl, 2 * dr);
    for s1 in 0..2 {
        for s2 in 0..2 {
            let mut block = CMat::zeros(dl, dr);
            for t1 in 0..2 {
                for t2 in 0..2 {
                    let g = gate[(2 * s1 + s2, 2 * t1 + t2)];
                    if g != C64::new(0.0, 0.0) {
                        block += theta.view((t1 * dl, t2 * dr), (dl, dr)) * g;
                    }
                }
            }
            evolved.view_mut((s1 * dl, s2 * dr), (dl, dr)).copy_from(&block);
        }
    }
    state.split_bond(&evolved, position, d);
}

impl CanonicalUnitCell {
    /// Splits `λ_y Γ_x λ_x Γ_y λ_y` back into Vidal form, keeping at most `d`
    /// singular values on the bond right of `x`.
    fn split_bond(&mut self, theta: &CMat, position: usize, d: usize) {
        let (x, y) = (position % 2, (position + 1) % 2);
        let outer = self.lambda[y].clone();
        let dl = outer.len();
        let dr = outer.len();
        let svd = theta.clone().svd(true, true);
        let u = svd.u.expect("requested U");
        let v_t = svd.v_t.expect("requested V†");
        let order = sorted_indices(&svd.singular_values);
        let top = svd.singular_values[order[0]];
        let keep: Vec<usize> = order
            .into_iter()
            .take(d)
            .filter(|&i| svd.singular_values[i] > SINGULAR_VALUE_FLOOR * top)
            .collect();
        let chi = keep.len();
        let norm = keep.iter().map(|&i| svd.singular_values[i].powi(2)).sum::<f64>().sqrt();
        self.lambda[x] = keep.iter().map(|&i| svd.singular_values[i] / norm).collect();

        let inv_outer: Vec<f64> = outer.iter().map(|&v| 1.0 / v).collect();
        for s in 0..2 {
            let gx = CMat::from_fn(dl, chi, |a, c| u[(s * dl + a, keep[c])]);
            let gy = CMat::from_fn(chi, dr, |c, b| v_t[(keep[c], s * dr + b)]);
            self.gamma[x][s] = scale_rows(&gx, &inv_outer);
            self.gamma[y][s] = scale_cols(&gy, &inv_outer);
        }
    }
}

/// Two-site term averaged over the A-B and B-A bonds.
pub fn energy_per_site(state: &CanonicalUnitCell, h: &CMat) -> f64 {
    (0..2)
        .map(|p| {
            let rho = state.two_site_rdm(p);
            (rho * h).trace().re
        })
        .sum::<f64>()
        / 2.0
}

/// `M_A = (√λ_B Γ_A √λ_A)^*`, `M_B = (√λ_A Γ_B √λ_B)^*`, padded with zeros to
/// a common bond dimension and normalised.
///
/// Block states of a [`SiteTensorSet`] are read as `⟨l| S_k^* ⊗ S_m |r⟩`,
/// which describes amplitudes `conj(Tr ∏ M)`; the conjugation makes both
/// evaluation paths describe the same state.
pub fn to_uniform_mps(state: &CanonicalUnitCell) -> Result<SiteTensorSet> {
    let sqrt = |v: &[f64]| v.iter().map(|x| x.sqrt()).collect::<Vec<f64>>();
    let d = state.lambda[0].len().max(state.lambda[1].len());
    let pad = |m: &CMat| {
        let mut out = CMat::zeros(d, d);
        out.view_mut((0, 0), (m.nrows(), m.ncols())).copy_from(m);
        out
    };
    let mut cell = Vec::with_capacity(2);
    for x in 0..2 {
        let left = sqrt(&state.lambda[1 - x]);
        let right = sqrt(&state.lambda[x]);
        let pair = [0, 1].map(|s| pad(&scale_cols(&scale_rows(&state.gamma[x][s], &left), &right).map(|z| z.conj())));
        cell.push(pair);
    }
    crate::mps::normalize_tensors(&SiteTensorSet::new(cell)?)
}

/// Metadata stored alongside a checkpointed state.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckpointMeta {
    pub model: String,
    pub params: Vec<f64>,
    pub bond_dimension: usize,
    pub seed: u64,
    pub schedule_hash: String,
    pub energy: f64,
}

pub fn write_checkpoint<W: Write>(state: &CanonicalUnitCell, meta: &CheckpointMeta, mut out: W) -> Result<()> {
    out.write_all(CHECKPOINT_MAGIC)?;
    out.write_u32::<LittleEndian>(CHECKPOINT_VERSION)?;
    write_str(&mut out, &meta.model)?;
    out.write_u64::<LittleEndian>(meta.params.len() as u64)?;
    for p in &meta.params {
        out.write_f64::<LittleEndian>(*p)?;
    }
    out.write_u64::<LittleEndian>(meta.bond_dimension as u64)?;
    out.write_u64::<LittleEndian>(meta.seed)?;
    write_str(&mut out, &meta.schedule_hash)?;
    out.write_f64::<LittleEndian>(meta.energy)?;
    for lam in &state.lambda {
        out.write_u64::<LittleEndian>(lam.len() as u64)?;
        for v in lam {
            out.write_f64::<LittleEndian>(*v)?;
        }
    }
    for pair in &state.gamma {
        for m in pair {
            out.write_u64::<LittleEndian>(m.nrows() as u64)?;
            out.write_u64::<LittleEndian>(m.ncols() as u64)?;
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    out.write_f64::<LittleEndian>(m[(i, j)].re)?;
                    out.write_f64::<LittleEndian>(m[(i, j)].im)?;
                }
            }
        }
    }
    Ok(())
}

pub fn read_checkpoint<R: Read>(mut input: R) -> Result<(CanonicalUnitCell, CheckpointMeta)> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(GqdError::Format("not an iTEBD checkpoint".into()));
    }
    let version = input.read_u32::<LittleEndian>()?;
    if version != CHECKPOINT_VERSION {
        return Err(GqdError::Format(format!("unsupported checkpoint version {version}")));
    }
    let model = read_str(&mut input)?;
    let count = read_len(&mut input, 64)?;
    let params = (0..count)
        .map(|_| input.read_f64::<LittleEndian>())
        .collect::<std::io::Result<Vec<f64>>>()?;
    let bond_dimension = read_len(&mut input, 1 << 12)?;
    let seed = input.read_u64::<LittleEndian>()?;
    let schedule_hash = read_str(&mut input)?;
    let energy = input.read_f64::<LittleEndian>()?;
    let mut lambda: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    for lam in lambda.iter_mut() {
        let len = read_len(&mut input, 1 << 12)?;
        *lam = (0..len)
            .map(|_| input.read_f64::<LittleEndian>())
            .collect::<std::io::Result<Vec<f64>>>()?;
    }
    let mut mats = Vec::with_capacity(4);
    for _ in 0..4 {
        let rows = read_len(&mut input, 1 << 12)?;
        let cols = read_len(&mut input, 1 << 12)?;
        let mut m = CMat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                let re = input.read_f64::<LittleEndian>()?;
                let im = input.read_f64::<LittleEndian>()?;
                m[(i, j)] = C64::new(re, im);
            }
        }
        mats.push(m);
    }
    let mut it = mats.into_iter();
    let mut next = || it.next().expect("four matrices");
    let state = CanonicalUnitCell {
        gamma: [[next(), next()], [next(), next()]],
        lambda,
    };
    let [da, db] = state.bond_dimensions();
    for (x, (rows, cols)) in [(db, da), (da, db)].into_iter().enumerate() {
        for m in &state.gamma[x] {
            if m.nrows() != rows || m.ncols() != cols {
                return Err(GqdError::Format("tensor shapes do not match singular values".into()));
            }
        }
    }
    Ok((
        state,
        CheckpointMeta {
            model,
            params,
            bond_dimension,
            seed,
            schedule_hash,
            energy,
        },
    ))
}

fn write_str<W: Write>(out: &mut W, s: &str) -> Result<()> {
    out.write_u32::<LittleEndian>(s.len() as u32)?;
    out.write_all(s.as_bytes())?;
    Ok(())
}

fn read_str<R: Read>(input: &mut R) -> Result<String> {
    let len = input.read_u32::<LittleEndian>()? as usize;
    if len > 1 << 16 {
        return Err(GqdError::Format(format!("string of length {len}")));
    }
    let mut buf = vec![0u8; len];
    input.read_exact(&mut buf)?;
    String::from_utf8(buf).map_err(|e| GqdError::Format(e.to_string()))
}

fn read_len<R: Read>(input: &mut R, cap: usize) -> Result<usize> {
    let v = input.read_u64::<LittleEndian>()? as usize;
    if v > cap {
        return Err(GqdError::Format(format!("length {v} exceeds {cap}")));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{xxz_term, XxzParams};

    #[test]
    fn canonicalize_keeps_the_state() {
        let state = random_state(5, 9);
        let canon = state.canonicalize().unwrap();
        assert!(canon.canonical_residual() < 1e-10);
        assert!(state.canonical_residual() > 1e-2);
        for p in 0..2 {
            let before = to_uniform_mps(&state).unwrap();
            let after = to_uniform_mps(&canon).unwrap();
            let rho = |set: &SiteTensorSet| {
                let mps = crate::mps::InfiniteMps::new(set, &crate::mps::EigenOptions::default()).unwrap();
                crate::rdm::block_rdm_at(&mps.tensors, &mps.fixed_point, p, 2, 4).unwrap().into_entries()
            };
            assert!((rho(&before) - rho(&after)).norm() < 1e-9);
            assert!((canon.two_site_rdm(p) - rho(&after)).norm() < 1e-9);
        }
    }

    #[test]
    fn gate_of_zero_and_diagonal_terms() {
        let id = two_site_gate(&CMat::zeros(4, 4), 0.3).unwrap();
        assert!((id - CMat::identity(4, 4)).norm() < 1e-15);
        let diag = [0.5, -1.0, 2.0, 0.0];
        let h = CMat::from_diagonal(&CVec::from_iterator(4, diag.iter().map(|&v| C64::new(v, 0.0))));
        let g = two_site_gate(&h, 0.2).unwrap();
        for (i, v) in diag.iter().enumerate() {
            assert!((g[(i, i)].re - (-0.2 * v).exp()).abs() < 1e-14);
        }
    }

    #[test]
    fn schedule_validation() {
        let st = |dt| TrotterStage { dt, max_steps: 10 };
        assert!(TrotterSchedule::new(vec![st(0.1), st(0.1)], 10, 1e-9).is_err());
        assert!(TrotterSchedule::new(vec![st(-0.1)], 10, 1e-9).is_err());
        assert!(TrotterSchedule::new(vec![st(0.1), st(0.01)], 10, 1e-9).is_ok());
    }

    #[test]
    fn product_state_energy() {
        let up = CanonicalUnitCell::product([C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
        let h = xxz_term(XxzParams { delta: 0.3 });
        assert!((energy_per_site(&up, &h) - 0.3).abs() < 1e-15);
        let mps = to_uniform_mps(&up).unwrap();
        assert_eq!(mps.bond_dimension(), 1);
        assert!(up.canonical_residual() < 1e-15);
    }

    #[test]
    fn checkpoint_round_trip() {
        let state = random_state(3, 5);
        let meta = CheckpointMeta {
            model: "xxz".into(),
            params: vec![1.5],
            bond_dimension: 3,
            seed: 5,
            schedule_hash: "abc".into(),
            energy: -1.25,
        };
        let mut buf = Vec::new();
        write_checkpoint(&state, &meta, &mut buf).unwrap();
        assert_eq!(&buf[..8], b"GQDITEBD");
        let (s2, m2) = read_checkpoint(buf.as_slice()).unwrap();
        assert_eq!(s2, state);
        assert_eq!(m2, meta);
        buf[0] = b'X';
        assert!(read_checkpoint(buf.as_slice()).is_err());
    }
}
