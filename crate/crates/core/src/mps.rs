//! Uniform infinite matrix product states and their transfer matrices.
//!
//! A state is given by one pair `(M_down, M_up)` of `D×D` matrices per
//! unit-cell position. All block quantities are contractions of products of
//! these matrices against the dominant left/right fixed points of the
//! transfer matrix `T = Σ_j M_j^* ⊗ M_j`.
//!
//! Vectors of length `D²` use the Kronecker index `(i, k) ↦ i·D + k`, where
//! `i` belongs to the conjugated factor. Internally such vectors are handled
//! as `D×D` matrices, which turns a Kronecker product acting on a vector into
//! two ordinary matrix products:
//!
//! * left action `v · (A^* ⊗ B)` becomes `A† V B`,
//! * right action `(A^* ⊗ B) r` becomes `A^* R Bᵀ`.

use log::debug;
use nalgebra::Schur;

use crate::linalg::{bilinear, mat_to_vec, max_abs_vec, vec_to_mat};
use crate::{CMat, CVec, GqdError, Result, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct SiteTensorSet {
    tensors: Vec<[CMat; 2]>,
    bond_dimension: usize,
}

impl SiteTensorSet {
    /// Builds a set from one `[M_down, M_up]` pair per unit-cell position.
    pub fn new(tensors: Vec<[CMat; 2]>) -> Result<Self> {
        if tensors.is_empty() || tensors.len() > 2 {
            return Err(GqdError::Dimension(format!(
                "unit cell must hold 1 or 2 positions, got {}",
                tensors.len()
            )));
        }
        let d = tensors[0][0].nrows();
        if d == 0 {
            return Err(GqdError::Dimension("bond dimension must be positive".into()));
        }
        for (p, pair) in tensors.iter().enumerate() {
            for (j, m) in pair.iter().enumerate() {
                if m.nrows() != d || m.ncols() != d {
                    return Err(GqdError::Dimension(format!(
                        "tensor {j} at position {p} is {}x{}, expected {d}x{d}",
                        m.nrows(),
                        m.ncols()
                    )));
                }
            }
        }
        Ok(Self {
            tensors,
            bond_dimension: d,
        })
    }

    /// Single-position (translation invariant) set.
    pub fn uniform(down: CMat, up: CMat) -> Result<Self> {
        Self::new(vec![[down, up]])
    }

    pub fn bond_dimension(&self) -> usize {
        self.bond_dimension
    }

    pub fn unit_cell(&self) -> usize {
        self.tensors.len()
    }

    /// Tensor pair at a chain position, taken modulo the unit cell.
    pub fn at(&self, position: usize) -> &[CMat; 2] {
        &self.tensors[position % self.tensors.len()]
    }

    pub fn tensors(&self) -> &[[CMat; 2]] {
        &self.tensors
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self {
            tensors: self
                .tensors
                .iter()
                .map(|[a, b]| [a * factor, b * factor])
                .collect(),
            bond_dimension: self.bond_dimension,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrix {
    entries: CMat,
}

impl TransferMatrix {
    pub fn from_entries(entries: CMat) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.nrows() == 0 {
            return Err(GqdError::Dimension(format!(
                "transfer matrix must be square and non-empty, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &CMat {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }
}

/// `Σ_j M_j^* ⊗ M_j` for one position.
pub fn site_transfer(pair: &[CMat; 2]) -> CMat {
    pair.iter()
        .map(|m| m.conjugate().kronecker(m))
        .fold(None, |acc: Option<CMat>, t| Some(acc.map_or(t.clone(), |a| a + t)))
        .expect("pair is non-empty")
}

/// Unit-cell transfer matrix: the ordered product `T_A · T_B` for two-site cells.
pub fn build_transfer_matrix(tensors: &SiteTensorSet) -> TransferMatrix {
    let entries = tensors
        .tensors()
        .iter()
        .map(site_transfer)
        .reduce(|acc, t| acc * t)
        .expect("unit cell is non-empty");
    TransferMatrix { entries }
}

/// `v · (A^* ⊗ B)` in matrix form.
#[inline]
pub fn push_left(v: &CMat, a: &CMat, b: &CMat) -> CMat {
    a.adjoint() * v * b
}

/// `(A^* ⊗ B) r` in matrix form.
#[inline]
pub fn push_right(r: &CMat, a: &CMat, b: &CMat) -> CMat {
    a.conjugate() * r * b.transpose()
}

/// `v · T_p` for the site transfer matrix of one position.
pub fn transfer_left(v: &CMat, pair: &[CMat; 2]) -> CMat {
    push_left(v, &pair[0], &pair[0]) + push_left(v, &pair[1], &pair[1])
}

/// `T_p · r` for the site transfer matrix of one position.
pub fn transfer_right(r: &CMat, pair: &[CMat; 2]) -> CMat {
    push_right(r, &pair[0], &pair[0]) + push_right(r, &pair[1], &pair[1])
}

/// What to do when the dominant eigenvalue is not separated from the rest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DegeneracyPolicy {
    /// Refuse with [`GqdError::DegenerateDominantEigenvalue`].
    #[default]
    Error,
    /// Use the spectral projector onto the dominant generalized eigenspace,
    /// weighted uniformly. This is the thermodynamic limit of a periodic
    /// ring when the dominant eigenvalue is repeated (GHZ-like fixed points,
    /// including defective ones). Clusters whose members differ in phase
    /// still produce an error.
    AverageGeneralized,
}

#[derive(Debug, Clone)]
pub struct EigenOptions {
    /// Relative residual required of the returned eigenvectors.
    pub tol: f64,
    /// Minimum relative gap `(|λ₁| − |λ₂|)/|λ₁|`.
    pub gap_threshold: f64,
    /// Largest `D²` handled by the dense path.
    pub dense_limit: usize,
    pub degeneracy: DegeneracyPolicy,
    pub max_iter: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            gap_threshold: 1e-8,
            dense_limit: 1024,
            degeneracy: DegeneracyPolicy::Error,
            max_iter: 20_000,
        }
    }
}

/// Dominant eigenvalue of a transfer matrix with biorthonormal left/right
/// eigenvectors.
///
/// In the regular case there is exactly one pair. Under
/// [`DegeneracyPolicy::AverageGeneralized`] a degenerate fixed point is
/// described by `m` pairs spanning the dominant generalized eigenspace, and
/// every contraction is averaged over them with weight `1/m`.
#[derive(Debug, Clone)]
pub struct DominantEigenpair {
    pub eigenvalue: C64,
    pub spectral_gap: f64,
    pairs: Vec<(CVec, CVec)>,
}

impl DominantEigenpair {
    pub fn left_vector(&self) -> &CVec {
        &self.pairs[0].0
    }

    pub fn right_vector(&self) -> &CVec {
        &self.pairs[0].1
    }

    /// All `(left, right)` pairs, biorthonormal under the bilinear pairing.
    pub fn pairs(&self) -> &[(CVec, CVec)] {
        &self.pairs
    }

    pub fn multiplicity(&self) -> usize {
        self.pairs.len()
    }

    pub fn weight(&self) -> f64 {
        1.0 / self.pairs.len() as f64
    }
}

/// Dominant eigenpair with the default options and the given residual tolerance.
pub fn dominant_eigenpair(t: &TransferMatrix, tol: f64) -> Result<DominantEigenpair> {
    if tol <= 0.0 {
        return Err(GqdError::InvalidArgument("tolerance must be positive".into()));
    }
    dominant_eigenpair_with(
        t,
        &EigenOptions {
            tol,
            ..EigenOptions::default()
        },
    )
}

pub fn dominant_eigenpair_with(t: &TransferMatrix, opts: &EigenOptions) -> Result<DominantEigenpair> {
    if t.dim() <= opts.dense_limit {
        dense_eigenpair(t.entries(), opts)
    } else {
        power_eigenpair(t.entries(), opts)
    }
}

/// Eigenvalues sorted by decreasing modulus (ties keep Schur order).
pub fn sorted_spectrum(m: &CMat) -> Result<Vec<C64>> {
    let n = m.nrows();
    if n == 1 {
        return Ok(vec![m[(0, 0)]]);
    }
    let schur = Schur::try_new(m.clone(), f64::EPSILON, 100 * n.max(10))
        .ok_or_else(|| GqdError::Eigensolver("Schur iteration did not converge".into()))?;
    let (_, tri) = schur.unpack();
    let mut values: Vec<C64> = (0..n).map(|i| tri[(i, i)]).collect();
    values.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
    Ok(values)
}

fn relative_gap(spectrum: &[C64]) -> f64 {
    if spectrum.len() < 2 {
        return 1.0;
    }
    let top = spectrum[0].norm();
    (top - spectrum[1].norm()) / top
}

fn dense_eigenpair(t: &CMat, opts: &EigenOptions) -> Result<DominantEigenpair> {
    let spectrum = sorted_spectrum(t)?;
    let lambda = spectrum[0];
    if lambda.norm() == 0.0 {
        return Err(GqdError::Eigensolver("transfer matrix is nilpotent".into()));
    }
    let gap = relative_gap(&spectrum);
    if gap < opts.gap_threshold {
        return match opts.degeneracy {
            DegeneracyPolicy::Error => Err(GqdError::DegenerateDominantEigenvalue {
                gap,
                threshold: opts.gap_threshold,
            }),
            DegeneracyPolicy::AverageGeneralized => generalized_fixed_point(t, &spectrum, gap, opts),
        };
    }

    let right = inverse_iteration(t, lambda, opts)?;
    let left = inverse_iteration(&t.transpose(), lambda, opts)?;
    finish_pair(t, left, right, gap, opts)
}

/// Phase-fixes the right vector, scales the left one so that `l·r = 1` and
/// checks the residuals.
fn finish_pair(t: &CMat, left: CVec, right: CVec, gap: f64, opts: &EigenOptions) -> Result<DominantEigenpair> {
    let right = fix_phase(right);
    let overlap = left.dot(&right);
    if overlap.norm() < 1e-300 {
        return Err(GqdError::Eigensolver(
            "left and right dominant eigenvectors are orthogonal".into(),
        ));
    }
    let left = left / overlap;
    let lambda = left.dot(&(t * &right));

    let scale = lambda.norm();
    let r_res = (t * &right - &right * lambda).norm() / (scale * right.norm());
    let l_res = (t.transpose() * &left - &left * lambda).norm() / (scale * left.norm());
    if r_res > opts.tol || l_res > opts.tol {
        return Err(GqdError::Eigensolver(format!(
            "residuals {r_res:.2e} (right) and {l_res:.2e} (left) exceed {:.1e}",
            opts.tol
        )));
    }
    Ok(DominantEigenpair {
        eigenvalue: lambda,
        spectral_gap: gap,
        pairs: vec![(left, right)],
    })
}

/// Makes the first non-negligible component real positive and the norm one.
fn fix_phase(v: CVec) -> CVec {
    let cutoff = 1e-10 * max_abs_vec(&v);
    let pivot = v
        .iter()
        .find(|z| z.norm() > cutoff)
        .copied()
        .unwrap_or(C64::new(1.0, 0.0));
    let phase = pivot.conj() / pivot.norm();
    let v = v * phase;
    let norm = v.norm();
    v / C64::new(norm, 0.0)
}

fn start_vector(n: usize) -> CVec {
    // Fixed, generic start so that results are reproducible.
    CVec::from_fn(n, |i, _| {
        let x = (i as f64 + 1.0) * 0.618_033_988_749_895;
        C64::new(1.0 + 0.25 * x.fract(), 0.1 * (x * 3.0).fract())
    })
}

fn inverse_iteration(t: &CMat, lambda: C64, opts: &EigenOptions) -> Result<CVec> {
    let n = t.nrows();
    let scale = lambda.norm();
    let mut x = start_vector(n);
    let mut offset = 1e-10;
    for _attempt in 0..4 {
        let shift = lambda + C64::new(offset * scale, 0.0);
        let shifted = t - CMat::identity(n, n) * shift;
        let lu = shifted.lu();
        let mut ok = true;
        for _ in 0..8 {
            let Some(y) = lu.solve(&x) else {
                ok = false;
                break;
            };
            let norm = y.norm();
            if !norm.is_finite() || norm == 0.0 {
                ok = false;
                break;
            }
            x = y / C64::new(norm, 0.0);
            let rayleigh = x.dotc(&(t * &x));
            let res = (t * &x - &x * rayleigh).norm() / scale;
            if res < 0.1 * opts.tol {
                return Ok(x);
            }
        }
        if ok {
            return Ok(x);
        }
        offset *= 100.0;
        x = start_vector(n);
    }
    Err(GqdError::Eigensolver("inverse iteration failed".into()))
}

fn generalized_fixed_point(
    t: &CMat,
    spectrum: &[C64],
    gap: f64,
    opts: &EigenOptions,
) -> Result<DominantEigenpair> {
    let top = spectrum[0];
    let scale = top.norm();
    let cluster: Vec<C64> = spectrum
        .iter()
        .copied()
        .take_while(|mu| (scale - mu.norm()) / scale < opts.gap_threshold.max(1e-7))
        .collect();
    if cluster.iter().any(|mu| (mu - top).norm() > 1e-6 * scale) {
        return Err(GqdError::DegenerateDominantEigenvalue {
            gap,
            threshold: opts.gap_threshold,
        });
    }
    let m = cluster.len();
    let mean = cluster.iter().sum::<C64>() / C64::new(m as f64, 0.0);
    let n = t.nrows();
    let shifted = t - CMat::identity(n, n) * mean;
    let mut power = shifted.clone();
    for _ in 1..m {
        power = &power * &shifted;
    }
    let svd = power.clone().svd(true, true);
    let u = svd.u.ok_or_else(|| GqdError::Eigensolver("SVD failed".into()))?;
    let v_t = svd.v_t.ok_or_else(|| GqdError::Eigensolver("SVD failed".into()))?;
    let rights: Vec<CVec> = (n - m..n).map(|i| v_t.row(i).adjoint()).collect();
    let raw_lefts: Vec<CVec> = (n - m..n).map(|i| u.column(i).conjugate()).collect();

    let gram = CMat::from_fn(m, m, |i, j| raw_lefts[i].dot(&rights[j]));
    let inv = gram
        .try_inverse()
        .ok_or_else(|| GqdError::Eigensolver("singular generalized eigenspace pairing".into()))?;
    let lefts: Vec<CVec> = (0..m)
        .map(|i| {
            (0..m).fold(CVec::zeros(n), |acc, k| acc + &raw_lefts[k] * inv[(i, k)])
        })
        .collect();

    let lambda = lefts
        .iter()
        .zip(&rights)
        .map(|(l, r)| l.dot(&(t * r)))
        .sum::<C64>()
        / C64::new(m as f64, 0.0);
    for r in &rights {
        let res = (&power * r).norm() / scale.powi(m as i32);
        if res > opts.tol.max(1e-8) {
            return Err(GqdError::Eigensolver(format!(
                "generalized eigenspace residual {res:.2e}"
            )));
        }
    }
    debug!("degenerate fixed point averaged over {m} generalized eigenvectors");
    Ok(DominantEigenpair {
        eigenvalue: lambda,
        spectral_gap: gap,
        pairs: lefts.into_iter().zip(rights).collect(),
    })
}

fn power_dominant(t: &CMat, opts: &EigenOptions) -> Result<(C64, CVec)> {
    let mut x = start_vector(t.nrows());
    x /= C64::new(x.norm(), 0.0);
    let mut lambda = C64::new(0.0, 0.0);
    for _ in 0..opts.max_iter {
        let y = t * &x;
        lambda = x.dotc(&y);
        let norm = y.norm();
        if norm == 0.0 {
            return Err(GqdError::Eigensolver("power iteration hit zero".into()));
        }
        let res = (&y - &x * lambda).norm() / lambda.norm().max(1e-300);
        x = y / C64::new(norm, 0.0);
        if res < 0.1 * opts.tol {
            return Ok((lambda, x));
        }
    }
    Err(GqdError::Eigensolver(format!(
        "power iteration did not converge in {} steps (eigenvalue estimate {lambda})",
        opts.max_iter
    )))
}

fn power_eigenpair(t: &CMat, opts: &EigenOptions) -> Result<DominantEigenpair> {
    let (lambda, right) = power_dominant(t, opts)?;
    let (_, left) = power_dominant(&t.transpose(), opts)?;
    let overlap = left.dot(&right);
    // Second eigenvalue from the deflated operator T − λ r lᵀ/(l·r).
    let deflated = t - (&right * left.transpose()) * (lambda / overlap);
    let second = {
        let mut x = start_vector(t.nrows());
        let mut est = 0.0;
        for _ in 0..200 {
            let y = &deflated * &x;
            let norm = y.norm();
            if norm < 1e-300 {
                est = 0.0;
                break;
            }
            est = norm / x.norm();
            x = y / C64::new(norm, 0.0);
        }
        est
    };
    let gap = (lambda.norm() - second) / lambda.norm();
    if gap < opts.gap_threshold {
        return Err(GqdError::DegenerateDominantEigenvalue {
            gap,
            threshold: opts.gap_threshold,
        });
    }
    finish_pair(t, left, right, gap, opts)
}

/// Modulus of the dominant eigenvalue; well defined even when it is degenerate.
pub fn dominant_modulus(t: &TransferMatrix, opts: &EigenOptions) -> Result<f64> {
    if t.dim() <= opts.dense_limit {
        Ok(sorted_spectrum(t.entries())?[0].norm())
    } else {
        Ok(power_dominant(t.entries(), opts)?.0.norm())
    }
}

/// Rescales every tensor so that the unit-cell transfer matrix has dominant
/// eigenvalue 1.
pub fn normalize_tensors(tensors: &SiteTensorSet) -> Result<SiteTensorSet> {
    normalize_tensors_with(tensors, &EigenOptions::default())
}

pub fn normalize_tensors_with(tensors: &SiteTensorSet, opts: &EigenOptions) -> Result<SiteTensorSet> {
    let t = build_transfer_matrix(tensors);
    let modulus = dominant_modulus(&t, opts)?;
    if modulus == 0.0 || !modulus.is_finite() {
        return Err(GqdError::Eigensolver(format!(
            "cannot normalize: dominant eigenvalue modulus {modulus}"
        )));
    }
    let exponent = -1.0 / (2.0 * tensors.unit_cell() as f64);
    Ok(tensors.scaled(C64::new(modulus.powf(exponent), 0.0)))
}

/// Left and right boundary matrices for a block of `len` sites whose first
/// site sits at unit-cell position `start`.
#[derive(Debug, Clone)]
pub struct BlockEnvironment {
    pub left: Vec<CMat>,
    pub right: Vec<CMat>,
    pub weight: f64,
}

impl BlockEnvironment {
    pub fn new(tensors: &SiteTensorSet, eig: &DominantEigenpair, start: usize, len: usize) -> Result<Self> {
        let d = tensors.bond_dimension();
        let uc = tensors.unit_cell();
        if eig.left_vector().len() != d * d {
            return Err(GqdError::Dimension(format!(
                "eigenvectors have length {}, expected {}",
                eig.left_vector().len(),
                d * d
            )));
        }
        let start = start % uc;
        let end = (start + len) % uc;
        let mut left = Vec::with_capacity(eig.multiplicity());
        let mut right = Vec::with_capacity(eig.multiplicity());
        for (l, r) in eig.pairs() {
            let mut lm = vec_to_mat(l, d);
            for p in 0..start {
                lm = transfer_left(&lm, tensors.at(p));
            }
            let mut rm = vec_to_mat(r, d);
            for p in (end..uc).rev() {
                if end == 0 {
                    break;
                }
                rm = transfer_right(&rm, tensors.at(p));
            }
            left.push(lm);
            right.push(rm);
        }
        Ok(Self {
            left,
            right,
            weight: eig.weight(),
        })
    }

    /// `Σ_i w · ⟨l_i| (A^* ⊗ B) |r_i⟩` for block strings `A`, `B`.
    pub fn expectation(&self, a: &CMat, b: &CMat) -> C64 {
        self.left
            .iter()
            .zip(&self.right)
            .map(|(l, r)| bilinear(&push_left(l, a, b), r))
            .sum::<C64>()
            * self.weight
    }

    /// Weighted `Σ_i ⟨v_i, r_i⟩` where `v_i` are already-propagated left matrices.
    pub fn close(&self, propagated: &[CMat]) -> C64 {
        propagated
            .iter()
            .zip(&self.right)
            .map(|(v, r)| bilinear(v, r))
            .sum::<C64>()
            * self.weight
    }
}

/// A normalized MPS together with its dominant fixed point.
#[derive(Debug, Clone)]
pub struct InfiniteMps {
    pub tensors: SiteTensorSet,
    pub fixed_point: DominantEigenpair,
}

impl InfiniteMps {
    pub fn new(tensors: &SiteTensorSet, opts: &EigenOptions) -> Result<Self> {
        let tensors = normalize_tensors_with(tensors, opts)?;
        let t = build_transfer_matrix(&tensors);
        let fixed_point = dominant_eigenpair_with(&t, opts)?;
        Ok(Self {
            tensors,
            fixed_point,
        })
    }

    pub fn environment(&self, start: usize, len: usize) -> Result<BlockEnvironment> {
        BlockEnvironment::new(&self.tensors, &self.fixed_point, start, len)
    }
}

/// Flattened `D²` vector of a matrix-form environment, for callers that want
/// the vector picture.
pub fn environment_vector(m: &CMat) -> CVec {
    mat_to_vec(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::real_to_complex;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn random_tensors(d: usize, seed: u64) -> SiteTensorSet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = || CMat::from_fn(d, d, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        SiteTensorSet::uniform(m(), m()).unwrap()
    }

    fn three_body_raw(g: f64) -> SiteTensorSet {
        let m1 = real_to_complex(&DMatrix::from_row_slice(2, 2, &[0., 0., 1., 1.]));
        let m2 = real_to_complex(&DMatrix::from_row_slice(2, 2, &[1., g, 0., 0.]));
        SiteTensorSet::uniform(m1, m2).unwrap()
    }

    #[test]
    fn scalar_product_state() {
        let t = build_transfer_matrix(
            &SiteTensorSet::uniform(CMat::from_element(1, 1, c(1.0)), CMat::from_element(1, 1, c(0.0))).unwrap(),
        );
        assert_eq!(t.entries()[(0, 0)], c(1.0));
    }

    #[test]
    fn rejects_mismatched_shapes() {
        let err = SiteTensorSet::uniform(CMat::zeros(2, 2), CMat::zeros(3, 3)).unwrap_err();
        assert!(matches!(err, GqdError::Dimension(_)));
        assert!(SiteTensorSet::new(vec![]).is_err());
    }

    #[test]
    fn three_body_g0_matches_explicit_kronecker_sum() {
        let t = build_transfer_matrix(&three_body_raw(0.0));
        // M1 = [[0,0],[1,1]], M2 = [[1,0],[0,0]]; M* ⊗ M written out by hand.
        #[rustfmt::skip]
        let expected = DMatrix::from_row_slice(4, 4, &[
            1., 0., 0., 0.,
            0., 0., 0., 0.,
            0., 0., 0., 0.,
            1., 1., 1., 1.,
        ]);
        assert!((t.entries() - real_to_complex(&expected)).norm() < 1e-15);
    }

    #[test]
    fn random_transfer_matches_index_loop() {
        let set = random_tensors(3, 7);
        let t = build_transfer_matrix(&set);
        let d = 3;
        let [m0, m1] = set.at(0);
        for i in 0..d {
            for k in 0..d {
                for j in 0..d {
                    for l in 0..d {
                        let want = m0[(i, j)].conj() * m0[(k, l)] + m1[(i, j)].conj() * m1[(k, l)];
                        assert!((t.entries()[(i * d + k, j * d + l)] - want).norm() < 1e-13);
                    }
                }
            }
        }
    }

    #[test]
    fn transfer_scales_quadratically() {
        let set = random_tensors(2, 3);
        let t1 = build_transfer_matrix(&set);
        let t2 = build_transfer_matrix(&set.scaled(C64::new(0.0, 3.0)));
        assert!((t1.entries() * c(9.0) - t2.entries()).norm() < 1e-12);
    }

    #[test]
    fn matrix_form_actions_agree_with_kronecker() {
        let set = random_tensors(3, 11);
        let t = build_transfer_matrix(&set);
        let v = start_vector(9);
        let left = v.transpose() * t.entries();
        let lm = transfer_left(&vec_to_mat(&v, 3), set.at(0));
        assert!((mat_to_vec(&lm) - left.transpose()).norm() < 1e-12);
        let right = t.entries() * &v;
        let rm = transfer_right(&vec_to_mat(&v, 3), set.at(0));
        assert!((mat_to_vec(&rm) - right).norm() < 1e-12);
    }

    #[test]
    fn diagonal_transfer_eigenpair() {
        let t = TransferMatrix::from_entries(CMat::from_diagonal(&CVec::from_vec(vec![c(1.0), c(0.5)]))).unwrap();
        let eig = dominant_eigenpair(&t, 1e-12).unwrap();
        assert!((eig.eigenvalue - c(1.0)).norm() < 1e-14);
        assert!((eig.right_vector()[0] - c(1.0)).norm() < 1e-12);
        assert!(eig.right_vector()[1].norm() < 1e-12);
        assert!((eig.left_vector()[0] - c(1.0)).norm() < 1e-12);
        assert!((eig.spectral_gap - 0.5).abs() < 1e-14);
    }

    #[test]
    fn equal_modulus_is_degenerate() {
        let t = TransferMatrix::from_entries(CMat::from_diagonal(&CVec::from_vec(vec![c(1.0), c(1.0), c(0.0), c(0.0)])))
            .unwrap();
        assert!(matches!(
            dominant_eigenpair(&t, 1e-10),
            Err(GqdError::DegenerateDominantEigenvalue { .. })
        ));
        // Opposite phases have no averaged limit either.
        let t = TransferMatrix::from_entries(CMat::from_diagonal(&CVec::from_vec(vec![c(1.0), c(-1.0)]))).unwrap();
        let opts = EigenOptions {
            degeneracy: DegeneracyPolicy::AverageGeneralized,
            ..Default::default()
        };
        assert!(dominant_eigenpair_with(&t, &opts).is_err());
    }

    #[test]
    fn generalized_policy_handles_identical_eigenvalues() {
        let t = TransferMatrix::from_entries(CMat::from_diagonal(&CVec::from_vec(vec![c(1.0), c(1.0), c(0.0), c(0.0)])))
            .unwrap();
        let opts = EigenOptions {
            degeneracy: DegeneracyPolicy::AverageGeneralized,
            ..Default::default()
        };
        let eig = dominant_eigenpair_with(&t, &opts).unwrap();
        assert_eq!(eig.multiplicity(), 2);
        for (i, (l, _)) in eig.pairs().iter().enumerate() {
            for (j, (_, r)) in eig.pairs().iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((l.dot(r) - c(want)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn three_body_g_half_matches_dense_reference() {
        // T at g = 1/2 has eigenvalues 1.5, 0.5, 0, 0.
        let set = three_body_raw(0.5);
        let t = build_transfer_matrix(&set);
        let eig = dominant_eigenpair(&t, 1e-12).unwrap();
        assert!((eig.eigenvalue - c(1.5)).norm() < 1e-12);
        assert!((eig.spectral_gap - 2.0 / 3.0).abs() < 1e-12);
        let r = eig.right_vector();
        let l = eig.left_vector();
        assert!((t.entries() * r - r * eig.eigenvalue).norm() < 1e-12);
        assert!((l.transpose() * t.entries() - l.transpose() * eig.eigenvalue).norm() < 1e-12);
        assert!((l.dot(r) - c(1.0)).norm() < 1e-14);
        let first = r.iter().find(|z| z.norm() > 1e-10).unwrap();
        assert!(first.im.abs() < 1e-15 && first.re > 0.0);
    }

    #[test]
    fn normalization_is_idempotent_and_scale_free() {
        let set = random_tensors(4, 5);
        let n1 = normalize_tensors(&set).unwrap();
        let lambda = sorted_spectrum(build_transfer_matrix(&n1).entries()).unwrap()[0];
        assert!((lambda.norm() - 1.0).abs() < 1e-12);
        let n2 = normalize_tensors(&n1).unwrap();
        for (a, b) in n1.tensors().iter().zip(n2.tensors()) {
            assert!((&a[0] - &b[0]).norm() < 1e-12 && (&a[1] - &b[1]).norm() < 1e-12);
        }
        let n3 = normalize_tensors(&set.scaled(c(2.0))).unwrap();
        for (a, b) in n1.tensors().iter().zip(n3.tensors()) {
            assert!((&a[0] - &b[0]).norm() < 1e-12);
        }
    }

    #[test]
    fn single_site_trace_is_one_after_normalization() {
        for seed in 0..5 {
            let mps = InfiniteMps::new(&random_tensors(3, seed), &EigenOptions::default()).unwrap();
            let env = mps.environment(0, 1).unwrap();
            let [a, b] = mps.tensors.at(0);
            let trace = env.expectation(a, a) + env.expectation(b, b);
            assert!((trace - c(1.0)).norm() < 1e-10, "seed {seed}: {trace}");
        }
    }

    #[test]
    fn power_path_agrees_with_dense() {
        let set = normalize_tensors(&random_tensors(4, 9)).unwrap();
        let t = build_transfer_matrix(&set);
        let dense = dominant_eigenpair(&t, 1e-10).unwrap();
        let opts = EigenOptions {
            dense_limit: 4,
            ..Default::default()
        };
        let power = dominant_eigenpair_with(&t, &opts).unwrap();
        assert!((dense.eigenvalue - power.eigenvalue).norm() < 1e-10);
        assert!((dense.right_vector() - power.right_vector()).norm() < 1e-8);
        assert!((dense.left_vector() - power.left_vector()).norm() < 1e-8);
    }

    #[test]
    fn two_site_cell_product_order() {
        let a = random_tensors(2, 1);
        let b = random_tensors(2, 2);
        let cell = SiteTensorSet::new(vec![a.at(0).clone(), b.at(0).clone()]).unwrap();
        let t = build_transfer_matrix(&cell);
        let want = site_transfer(a.at(0)) * site_transfer(b.at(0));
        assert!((t.entries() - want).norm() < 1e-14);
    }
}
