//! Validated quantum-state types and the primitive operations on them.
//!
//! Bipartite vectors are laid out with the Alice factor first:
//! amplitude index `a * dim_b + b`. Reduced states of a purification are
//! always taken on the Bob factor; the purifying ancilla sits on Alice.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{
    self, all_finite, check_dim, hermitian_defect, hermitian_part, max_abs, psd_eigen, re,
    trace, unitarity_defect, CMatrix, CVector, Eigen, C64,
};

/// Tolerance for Hermiticity, trace and positivity of density matrices.
pub const STATE_TOL: f64 = 1e-10;
/// Tolerance for POVM completeness.
pub const POVM_TOL: f64 = 1e-9;
/// Tolerance for unitarity of supplied operators.
pub const UNITARY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Party {
    Alice,
    Bob,
}

impl Party {
    pub fn other(self) -> Party {
        match self {
            Party::Alice => Party::Bob,
            Party::Bob => Party::Alice,
        }
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Party::Alice => write!(f, "Alice"),
            Party::Bob => write!(f, "Bob"),
        }
    }
}

/// Positive semidefinite, unit-trace, Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Shape(format!(
                "density matrix must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.nrows() == 0 {
            return Err(Error::Shape("density matrix must be non-empty".into()));
        }
        if !all_finite(&matrix) {
            return Err(Error::Validation("non-finite entry".into()));
        }
        let herm = hermitian_defect(&matrix);
        if herm > STATE_TOL {
            return Err(Error::Validation(format!(
                "not Hermitian (max deviation {herm:.3e})"
            )));
        }
        let tr = trace(&matrix);
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::Validation(format!("trace is {tr}, expected 1")));
        }
        let matrix = hermitian_part(&matrix);
        let min_eig = linalg::hermitian_eigen(&matrix).values[0];
        if min_eig < -STATE_TOL {
            return Err(Error::Validation(format!(
                "not positive semidefinite (min eigenvalue {min_eig:.3e})"
            )));
        }
        Ok(Self { matrix })
    }

    /// Rescales a PSD matrix to unit trace before validating.
    pub fn normalized(matrix: CMatrix) -> Result<Self> {
        let tr = trace(&matrix).re;
        if !(tr > 0.0) {
            return Err(Error::Validation(format!(
                "cannot normalize matrix with trace {tr}"
            )));
        }
        Self::new(matrix / re(tr))
    }

    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        Self::new(linalg::diag(probs))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: linalg::identity(dim) / re(dim as f64),
        }
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut m = CMatrix::zeros(dim, dim);
        m[(index, index)] = re(1.0);
        Self { matrix: m }
    }

    pub fn from_pure(state: &PureState) -> Self {
        let v = state.amplitudes();
        Self {
            matrix: v * v.adjoint(),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    /// Eigendecomposition with tiny negative eigenvalues clamped to zero.
    pub fn eigen(&self) -> Eigen {
        psd_eigen(&self.matrix)
    }

    pub fn is_diagonal(&self) -> bool {
        linalg::is_diagonal(&self.matrix, 1e-14)
    }

    pub fn diagonal_values(&self) -> Vec<f64> {
        linalg::real_diagonal(&self.matrix)
    }

    /// `Tr(m ρ)` for a Hermitian operator `m`.
    pub fn expectation(&self, m: &CMatrix) -> f64 {
        linalg::trace_product(m, &self.matrix).re
    }

    pub fn max_entry_distance(&self, other: &DensityMatrix) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        max_abs(&(&self.matrix - &other.matrix))
    }
}

/// Unit vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: CVector,
}

impl PureState {
    pub fn new(amplitudes: CVector) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::Shape("state vector must be non-empty".into()));
        }
        if !amplitudes.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::Validation("non-finite amplitude".into()));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::Validation(format!("norm is {norm}, expected 1")));
        }
        Ok(Self { amplitudes })
    }

    pub fn normalized(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm > 0.0) {
            return Err(Error::Validation("cannot normalize the zero vector".into()));
        }
        Self::new(amplitudes / re(norm))
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = CVector::zeros(dim);
        v[index] = re(1.0);
        Self { amplitudes: v }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amplitudes
    }

    pub fn inner(&self, other: &PureState) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// `|⟨self|other⟩|`, the phase-invariant overlap.
    pub fn overlap(&self, other: &PureState) -> f64 {
        self.inner(other).norm()
    }

    /// Trace distance of the two rays (un-halved convention).
    pub fn ray_trace_distance(&self, other: &PureState) -> f64 {
        let f = self.overlap(other).min(1.0);
        2.0 * (1.0 - f * f).max(0.0).sqrt()
    }

    /// `min_γ ‖self − e^{iγ} other‖`.
    pub fn phase_distance(&self, other: &PureState) -> f64 {
        let ip = other.inner(self);
        let phase = if ip.norm() > 0.0 { ip / ip.norm() } else { re(1.0) };
        (&self.amplitudes - &other.amplitudes * phase).norm()
    }
}

/// Pure state on `C^{dim_a} ⊗ C^{dim_b}` (Alice first).
#[derive(Debug, Clone, PartialEq)]
pub struct BipartitePureState {
    state: PureState,
    dim_a: usize,
    dim_b: usize,
}

impl BipartitePureState {
    pub fn new(state: PureState, dim_a: usize, dim_b: usize) -> Result<Self> {
        if dim_a * dim_b != state.dim() {
            return Err(Error::Shape(format!(
                "{dim_a} x {dim_b} does not match vector length {}",
                state.dim()
            )));
        }
        Ok(Self {
            state,
            dim_a,
            dim_b,
        })
    }

    /// Builds `|a⟩ ⊗ |b⟩`.
    pub fn product(a: &PureState, b: &PureState) -> Self {
        let v = a.amplitudes().kronecker(b.amplitudes());
        Self {
            state: PureState { amplitudes: v },
            dim_a: a.dim(),
            dim_b: b.dim(),
        }
    }

    /// Reshapes an Alice-rows coefficient matrix into a bipartite state.
    pub fn from_coefficients(m: &CMatrix) -> Result<Self> {
        let (da, db) = (m.nrows(), m.ncols());
        let mut v = CVector::zeros(da * db);
        for a in 0..da {
            for b in 0..db {
                v[a * db + b] = m[(a, b)];
            }
        }
        Self::new(PureState::new(v)?, da, db)
    }

    pub fn state(&self) -> &PureState {
        &self.state
    }

    pub fn amplitudes(&self) -> &CVector {
        self.state.amplitudes()
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn dim_of(&self, party: Party) -> usize {
        match party {
            Party::Alice => self.dim_a,
            Party::Bob => self.dim_b,
        }
    }

    /// Coefficient matrix with the given party's index as rows.
    pub fn coefficients(&self, rows: Party) -> CMatrix {
        let (da, db) = (self.dim_a, self.dim_b);
        let v = self.amplitudes();
        match rows {
            Party::Alice => CMatrix::from_fn(da, db, |a, b| v[a * db + b]),
            Party::Bob => CMatrix::from_fn(db, da, |b, a| v[a * db + b]),
        }
    }

    /// Appends a `dim`-level register in basis state `index` to Alice's side.
    pub fn with_alice_register(&self, dim: usize, index: usize) -> Self {
        let (da, db) = (self.dim_a, self.dim_b);
        let v = self.amplitudes();
        let mut out = CVector::zeros(da * dim * db);
        for a in 0..da {
            for b in 0..db {
                out[(a * dim + index) * db + b] = v[a * db + b];
            }
        }
        Self {
            state: PureState { amplitudes: out },
            dim_a: da * dim,
            dim_b: db,
        }
    }
}

/// Kronecker product of two density matrices, subject to the dense cap.
pub fn tensor(a: &DensityMatrix, b: &DensityMatrix) -> Result<DensityMatrix> {
    let dim = a.dim().checked_mul(b.dim()).ok_or(Error::Size {
        dim: usize::MAX,
        cap: linalg::max_dim(),
    })?;
    check_dim(dim)?;
    Ok(DensityMatrix {
        matrix: linalg::kron(a.matrix(), b.matrix()),
    })
}

/// Reduced state on `keep`.
pub fn partial_trace(s: &BipartitePureState, keep: Party) -> DensityMatrix {
    let m = s.coefficients(keep);
    DensityMatrix {
        matrix: hermitian_part(&(&m * m.adjoint())),
    }
}

/// Canonical purification `∑_i √λ_i |i⟩_anc |v_i⟩` with an ancilla of the
/// same dimension as `rho`, placed on Alice's side.
pub fn purify(rho: &DensityMatrix) -> BipartitePureState {
    purify_with_ancilla(rho, rho.dim()).expect("ancilla as large as the system")
}

/// Largest eigenvalue mass a purification may discard to fit its ancilla.
pub const PURIFY_TAIL_TOL: f64 = 1e-12;

/// Canonical purification with an ancilla of dimension `anc_dim`.
///
/// Eigenvalues are taken in decreasing order so the first ancilla levels
/// carry the dominant components; zero eigenvalues are dropped, and so is
/// a tail of total weight below [`PURIFY_TAIL_TOL`] that does not fit.
pub fn purify_with_ancilla(rho: &DensityMatrix, anc_dim: usize) -> Result<BipartitePureState> {
    let e = rho.eigen();
    let d = rho.dim();
    let mut support: Vec<usize> = (0..d).rev().filter(|&i| e.values[i] > 0.0).collect();
    if support.len() > anc_dim {
        let tail: f64 = support[anc_dim..].iter().map(|&i| e.values[i]).sum();
        if tail > PURIFY_TAIL_TOL {
            return Err(Error::Size {
                dim: support.len(),
                cap: anc_dim,
            });
        }
        support.truncate(anc_dim);
    }
    let mut coeffs = CMatrix::zeros(anc_dim, d);
    for (slot, &i) in support.iter().enumerate() {
        let w = re(e.values[i].sqrt());
        for b in 0..d {
            // amplitude of |slot⟩|b⟩ is √λ_i ⟨b|v_i⟩
            coeffs[(slot, b)] = w * e.vectors[(b, i)];
        }
    }
    let norm = coeffs.norm();
    coeffs /= re(norm);
    BipartitePureState::from_coefficients(&coeffs)
}

fn require_same_dim(a: &DensityMatrix, b: &DensityMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::Shape(format!(
            "dimension mismatch: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(())
}

/// `Tr|a − b|`, in `[0, 2]`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    require_same_dim(a, b)?;
    let diff = a.matrix() - b.matrix();
    Ok(linalg::hermitian_eigen(&diff)
        .values
        .iter()
        .map(|v| v.abs())
        .sum())
}

/// Two-outcome POVM `{M, I − M}` with the optimal success probability.
#[derive(Debug, Clone)]
pub struct HelstromMeasurement {
    pub success_probability: f64,
    /// Projector onto the positive eigenspace of `a − b`; outcome "a".
    pub guess_a: CMatrix,
    pub guess_b: CMatrix,
}

/// Optimal probability of identifying which of two equiprobable states was
/// prepared, with the projective measurement that achieves it.
pub fn helstrom_distinguish(a: &DensityMatrix, b: &DensityMatrix) -> Result<HelstromMeasurement> {
    require_same_dim(a, b)?;
    let diff = a.matrix() - b.matrix();
    let e = linalg::hermitian_eigen(&diff);
    let dist: f64 = e.values.iter().map(|v| v.abs()).sum();
    let guess_a = e.projector(|v| v > 0.0);
    let guess_b = linalg::identity(a.dim()) - &guess_a;
    Ok(HelstromMeasurement {
        success_probability: 0.5 + dist / 4.0,
        guess_a,
        guess_b,
    })
}

/// Applies `u` to one factor of a bipartite pure state. `u` must be unitary
/// within [`UNITARY_TOL`].
pub fn apply_local_unitary(
    s: &BipartitePureState,
    u: &CMatrix,
    party: Party,
) -> Result<BipartitePureState> {
    let d = s.dim_of(party);
    if u.nrows() != d || u.ncols() != d {
        return Err(Error::Shape(format!(
            "unitary is {}x{}, {party} factor has dimension {d}",
            u.nrows(),
            u.ncols()
        )));
    }
    let defect = unitarity_defect(u);
    if defect > UNITARY_TOL {
        return Err(Error::Validation(format!(
            "operator is not unitary (max |U†U − I| = {defect:.3e})"
        )));
    }
    Ok(apply_local_unchecked(s, u, party))
}

/// [`apply_local_unitary`] without the unitarity check.
pub fn apply_local_unchecked(s: &BipartitePureState, u: &CMatrix, party: Party) -> BipartitePureState {
    let rows = u * s.coefficients(party);
    let (da, db) = (s.dim_a, s.dim_b);
    let mut v = CVector::zeros(da * db);
    match party {
        Party::Alice => {
            for a in 0..da {
                for b in 0..db {
                    v[a * db + b] = rows[(a, b)];
                }
            }
        }
        Party::Bob => {
            for b in 0..db {
                for a in 0..da {
                    v[a * db + b] = rows[(b, a)];
                }
            }
        }
    }
    BipartitePureState {
        state: PureState { amplitudes: v },
        dim_a: da,
        dim_b: db,
    }
}

/// A measurement `{M_i}` with PSD elements summing to the identity.
#[derive(Debug, Clone)]
pub struct Povm {
    dim: usize,
    elements: Vec<CMatrix>,
}

impl Povm {
    pub fn new(elements: Vec<CMatrix>) -> Result<Self> {
        let dim = elements
            .first()
            .map(|m| m.nrows())
            .ok_or_else(|| Error::Validation("POVM needs at least one element".into()))?;
        let mut sum = CMatrix::zeros(dim, dim);
        for (i, m) in elements.iter().enumerate() {
            validate_povm_element(m, dim).map_err(|e| prefix_error(e, &format!("element {i}")))?;
            sum += m;
        }
        let dev = max_abs(&(sum - linalg::identity(dim)));
        if dev > POVM_TOL {
            return Err(Error::Validation(format!(
                "POVM elements do not sum to the identity (max deviation {dev:.3e})"
            )));
        }
        Ok(Self { dim, elements })
    }

    /// Labeled elements plus the completing element `I − ∑ M_y`, which is
    /// stored last.
    pub fn with_complement(labeled: Vec<CMatrix>) -> Result<Self> {
        let dim = labeled
            .first()
            .map(|m| m.nrows())
            .ok_or_else(|| Error::Validation("POVM needs at least one element".into()))?;
        let mut rest = linalg::identity(dim);
        for m in &labeled {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::Shape("POVM elements differ in dimension".into()));
            }
            rest -= m;
        }
        let mut elements = labeled;
        elements.push(hermitian_part(&rest));
        Self::new(elements)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    pub fn probabilities(&self, rho: &DensityMatrix) -> Vec<f64> {
        self.elements.iter().map(|m| rho.expectation(m)).collect()
    }
}

/// Checks `0 ⪯ m ⪯ I` within tolerance.
pub fn validate_povm_element(m: &CMatrix, dim: usize) -> Result<()> {
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::Shape(format!(
            "element is {}x{}, expected {dim}x{dim}",
            m.nrows(),
            m.ncols()
        )));
    }
    if !all_finite(m) {
        return Err(Error::Validation("non-finite entry".into()));
    }
    let herm = hermitian_defect(m);
    if herm > POVM_TOL {
        return Err(Error::Validation(format!(
            "not Hermitian (max deviation {herm:.3e})"
        )));
    }
    let e = linalg::hermitian_eigen(m);
    let lo = e.values[0];
    let hi = e.max_value();
    if lo < -STATE_TOL || hi > 1.0 + STATE_TOL {
        return Err(Error::Validation(format!(
            "eigenvalues [{lo:.3e}, {hi:.3e}] leave [0, 1]"
        )));
    }
    Ok(())
}

fn prefix_error(e: Error, what: &str) -> Error {
    match e {
        Error::Validation(m) => Error::Validation(format!("{what}: {m}")),
        Error::Shape(m) => Error::Shape(format!("{what}: {m}")),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use crate::linalg::c;
    use crate::random;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bell() -> BipartitePureState {
        let h = 1.0 / 2f64.sqrt();
        let v = CVector::from_vec(vec![re(h), re(0.0), re(0.0), re(h)]);
        BipartitePureState::new(PureState::new(v).unwrap(), 2, 2).unwrap()
    }

    fn plus() -> PureState {
        let h = 1.0 / 2f64.sqrt();
        PureState::new(CVector::from_vec(vec![re(h), re(h)])).unwrap()
    }

    #[test]
    fn tensor_identity_and_basis_cases() {
        let half = DensityMatrix::maximally_mixed(2);
        let t = tensor(&half, &half).unwrap();
        assert!(t.max_entry_distance(&DensityMatrix::maximally_mixed(4)) < 1e-15);

        let t = tensor(&DensityMatrix::basis(2, 0), &DensityMatrix::basis(2, 1)).unwrap();
        assert!(t.max_entry_distance(&DensityMatrix::basis(4, 1)) < 1e-15);
    }

    #[test]
    fn tensor_matches_four_loop_kronecker() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random::density_matrix(&mut rng, 2, 2);
        let b = random::density_matrix(&mut rng, 2, 2);
        let t = tensor(&a, &b).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        let want = a.matrix()[(i, j)] * b.matrix()[(k, l)];
                        assert!((t.matrix()[(2 * i + k, 2 * j + l)] - want).norm() < 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn tensor_respects_the_dense_cap() {
        let big = DensityMatrix::maximally_mixed(128);
        assert!(matches!(tensor(&big, &big), Err(Error::Size { .. })));
    }

    #[test]
    fn partial_trace_cases() {
        let rb = partial_trace(&bell(), Party::Bob);
        assert!(rb.max_entry_distance(&DensityMatrix::maximally_mixed(2)) < 1e-15);

        let prod = BipartitePureState::product(&PureState::basis(2, 0), &plus());
        let rb = partial_trace(&prod, Party::Bob);
        assert!(rb.max_entry_distance(&DensityMatrix::from_pure(&plus())) < 1e-15);
        let ra = partial_trace(&prod, Party::Alice);
        assert!(ra.max_entry_distance(&DensityMatrix::basis(2, 0)) < 1e-15);
    }

    #[test]
    fn partial_trace_matches_reshape_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v = random::pure_state(&mut rng, 8);
        let s = BipartitePureState::new(v.clone(), 2, 4).unwrap();
        // ρ_B[b, b'] = ∑_a ψ[a, b] conj(ψ[a, b'])
        let amp = v.amplitudes();
        let rb = partial_trace(&s, Party::Bob);
        for b in 0..4 {
            for bp in 0..4 {
                let want: C64 = (0..2).map(|a| amp[a * 4 + b] * amp[a * 4 + bp].conj()).sum();
                assert!((rb.matrix()[(b, bp)] - want).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn purify_pure_and_mixed() {
        let p = purify(&DensityMatrix::basis(2, 0));
        assert_eq!(p.dim_a(), 2);
        let ra = partial_trace(&p, Party::Alice);
        // product: the ancilla is pure too
        assert!((ra.eigen().max_value() - 1.0).abs() < 1e-12);

        let p = purify(&DensityMatrix::maximally_mixed(2));
        let schmidt = p.coefficients(Party::Alice).svd(false, false).singular_values;
        for s in schmidt.iter() {
            assert!((s - 1.0 / 2f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn purify_round_trip_rank_two() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rho = random::density_matrix(&mut rng, 3, 2);
        let back = partial_trace(&purify(&rho), Party::Bob);
        assert!(back.max_entry_distance(&rho) < 1e-12);
    }

    #[test]
    fn trace_distance_cases() {
        let z = DensityMatrix::basis(2, 0);
        let o = DensityMatrix::basis(2, 1);
        assert!(trace_distance(&z, &z).unwrap().abs() < 1e-15);
        assert!((trace_distance(&z, &o).unwrap() - 2.0).abs() < 1e-14);
        let mm = DensityMatrix::maximally_mixed(2);
        assert!((trace_distance(&z, &mm).unwrap() - 1.0).abs() < 1e-14);
        assert!(matches!(
            trace_distance(&z, &DensityMatrix::maximally_mixed(3)),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn helstrom_cases() {
        let z = DensityMatrix::basis(2, 0);
        assert!((helstrom_distinguish(&z, &z).unwrap().success_probability - 0.5).abs() < 1e-15);
        let o = DensityMatrix::basis(2, 1);
        assert!((helstrom_distinguish(&z, &o).unwrap().success_probability - 1.0).abs() < 1e-14);
    }

    #[test]
    fn helstrom_matches_angle_grid_search() {
        let a = DensityMatrix::basis(2, 0);
        let b = DensityMatrix::from_pure(&plus());
        let h = helstrom_distinguish(&a, &b).unwrap();
        // projective two-outcome measurements on a real qubit state pair
        let steps = 200_000;
        let mut best: f64 = 0.0;
        for k in 0..steps {
            let th = std::f64::consts::PI * k as f64 / steps as f64;
            let v = CVector::from_vec(vec![re(th.cos()), re(th.sin())]);
            let p = &v * v.adjoint();
            let val = 0.5 + 0.5 * (a.expectation(&p) - b.expectation(&p));
            best = best.max(val);
        }
        assert!((h.success_probability - best).abs() < 1e-9);
        assert!((h.success_probability - (0.5 + 2f64.sqrt() / 4.0)).abs() < 1e-12);
        let achieved = 0.5 + 0.5 * (a.expectation(&h.guess_a) - b.expectation(&h.guess_a));
        assert!((achieved - h.success_probability).abs() < 1e-12);
    }

    #[test]
    fn local_unitary_cases() {
        let s = bell();
        let same = apply_local_unitary(&s, &linalg::identity(2), Party::Alice).unwrap();
        assert!(same.state().phase_distance(s.state()) < 1e-15);

        let x = CMatrix::from_row_slice(2, 2, &[re(0.0), re(1.0), re(1.0), re(0.0)]);
        let flipped = apply_local_unitary(&s, &x, Party::Alice).unwrap();
        let h = 1.0 / 2f64.sqrt();
        let want = CVector::from_vec(vec![re(0.0), re(h), re(h), re(0.0)]);
        assert!((flipped.amplitudes() - want).norm() < 1e-15);

        let bad = CMatrix::from_row_slice(2, 2, &[re(1.0), re(0.0), re(0.0), c(0.5, 0.0)]);
        assert!(matches!(
            apply_local_unitary(&s, &bad, Party::Alice),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn local_unitary_keeps_the_other_marginal() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let s = BipartitePureState::new(random::pure_state(&mut rng, 12), 3, 4).unwrap();
        let u = random::unitary(&mut rng, 3);
        let t = apply_local_unitary(&s, &u, Party::Alice).unwrap();
        assert!((t.amplitudes().norm() - 1.0).abs() < 1e-12);
        let before = partial_trace(&s, Party::Bob);
        let after = partial_trace(&t, Party::Bob);
        assert!(before.max_entry_distance(&after) < 1e-12);

        let w = random::unitary(&mut rng, 4);
        let t = apply_local_unitary(&s, &w, Party::Bob).unwrap();
        let before = partial_trace(&s, Party::Alice);
        let after = partial_trace(&t, Party::Alice);
        assert!(before.max_entry_distance(&after) < 1e-12);
    }

    #[test]
    fn povm_rejects_incomplete_sets() {
        let half = linalg::identity(2) * re(0.45);
        let err = Povm::new(vec![half.clone(), half]).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
        let ok = Povm::with_complement(vec![DensityMatrix::basis(2, 0).into_matrix()]).unwrap();
        assert_eq!(ok.len(), 2);
    }

    #[test]
    fn density_validation_errors() {
        assert!(DensityMatrix::diagonal(&[0.5, 0.4]).is_err());
        assert!(DensityMatrix::diagonal(&[1.2, -0.2]).is_err());
        let m = CMatrix::from_row_slice(2, 2, &[re(0.5), re(0.1), re(0.0), re(0.5)]);
        assert!(DensityMatrix::new(m).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn trace_distance_is_a_metric(seed in any::<u64>(), dim in 1usize..=8) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let [a, b, c] = [0; 3].map(|_| {
                let rank = rng.random_range(1..=dim);
                random::density_matrix(&mut rng, dim, rank)
            });
            let ab = trace_distance(&a, &b).unwrap();
            prop_assert!((ab - trace_distance(&b, &a).unwrap()).abs() < 1e-10);
            prop_assert!(ab >= -1e-12 && ab <= 2.0 + 1e-12);
            prop_assert!(ab <= trace_distance(&a, &c).unwrap() + trace_distance(&c, &b).unwrap() + 1e-8);
        }

        #[test]
        fn purification_traces_back(seed in any::<u64>(), dim in 1usize..=16) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rank = rng.random_range(1..=dim);
            let rho = random::density_matrix(&mut rng, dim, rank);
            prop_assert!(partial_trace(&purify(&rho), Party::Bob).max_entry_distance(&rho) < 1e-9);
        }

        #[test]
        fn local_unitaries_fix_the_other_marginal(seed in any::<u64>(), da in 1usize..=4, db in 1usize..=4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = BipartitePureState::new(random::pure_state(&mut rng, da * db), da, db).unwrap();
            let t = apply_local_unitary(&s, &random::unitary(&mut rng, da), Party::Alice).unwrap();
            prop_assert!(partial_trace(&s, Party::Bob).max_entry_distance(&partial_trace(&t, Party::Bob)) < 1e-9);
            let t = apply_local_unitary(&s, &random::unitary(&mut rng, db), Party::Bob).unwrap();
            prop_assert!(partial_trace(&s, Party::Alice).max_entry_distance(&partial_trace(&t, Party::Alice)) < 1e-9);
        }
    }
}
