//! Dense complex linear algebra shared by every other module.
//!
//! Matrices are `nalgebra::DMatrix<Complex64>`. Everything here works on
//! plain matrices; the validated quantum types live in [`crate::state`].

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Default cap on any dense dimension we are willing to simulate.
pub const DEFAULT_MAX_DIM: usize = 4096;

/// Eigenvalues in `[-EIGEN_CLAMP, 0)` are treated as zero.
pub const EIGEN_CLAMP: f64 = 1e-10;

/// Dense-dimension cap, overridable through `QSC_MAX_DIM`.
pub fn max_dim() -> usize {
    static CAP: OnceLock<usize> = OnceLock::new();
    *CAP.get_or_init(|| {
        std::env::var("QSC_MAX_DIM")
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .filter(|&v: &usize| v > 0)
            .unwrap_or(DEFAULT_MAX_DIM)
    })
}

pub fn check_dim(dim: usize) -> Result<()> {
    let cap = max_dim();
    if dim > cap {
        return Err(Error::Size { dim, cap });
    }
    Ok(())
}

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Largest entry modulus of `m - m^†`.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `(m + m^†) / 2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * re(0.5)
}

/// Largest entry modulus of `u^† u - I`.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    let g = u.adjoint() * u;
    let mut worst = 0.0f64;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let target = if i == j { re(1.0) } else { re(0.0) };
            worst = worst.max((g[(i, j)] - target).norm());
        }
    }
    worst
}

pub fn all_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn trace(m: &CMatrix) -> C64 {
    (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)]).sum()
}

/// `Tr(a b)` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let mut acc = re(0.0);
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Spectral decomposition of a Hermitian matrix; eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Eigen {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, i: usize) -> CVector {
        self.vectors.column(i).into_owned()
    }

    pub fn max_value(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// Rebuilds `∑ f(λ_i) |v_i⟩⟨v_i|`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.dim();
        let mut scaled = self.vectors.clone();
        for (j, &lam) in self.values.iter().enumerate() {
            let w = re(f(lam));
            for i in 0..n {
                scaled[(i, j)] *= w;
            }
        }
        scaled * self.vectors.adjoint()
    }

    /// Projector onto the span of eigenvectors whose eigenvalue passes `keep`.
    pub fn projector(&self, keep: impl Fn(f64) -> bool) -> CMatrix {
        self.map(|lam| if keep(lam) { 1.0 } else { 0.0 })
    }

    /// Orthonormal columns spanning eigenvalues that pass `keep`.
    pub fn basis(&self, keep: impl Fn(f64) -> bool) -> CMatrix {
        let cols: Vec<CVector> = self
            .values
            .iter()
            .enumerate()
            .filter(|(_, &lam)| keep(lam))
            .map(|(i, _)| self.vector(i))
            .collect();
        columns_to_matrix(self.vectors.nrows(), &cols)
    }
}

/// Hermitian eigendecomposition. The input is symmetrized first.
pub fn hermitian_eigen(m: &CMatrix) -> Eigen {
    let n = m.nrows();
    if n == 0 {
        return Eigen {
            values: Vec::new(),
            vectors: CMatrix::zeros(0, 0),
        };
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Eigen { values, vectors }
}

/// Eigendecomposition of a PSD matrix with tiny negative eigenvalues clamped.
pub fn psd_eigen(m: &CMatrix) -> Eigen {
    let mut e = hermitian_eigen(m);
    for lam in e.values.iter_mut() {
        if *lam < 0.0 && *lam >= -EIGEN_CLAMP {
            *lam = 0.0;
        }
    }
    e
}

pub fn columns_to_matrix(rows: usize, cols: &[CVector]) -> CMatrix {
    let mut m = CMatrix::zeros(rows, cols.len());
    for (j, col) in cols.iter().enumerate() {
        m.set_column(j, col);
    }
    m
}

/// Orthogonalizes `v` against `basis` (two passes) and returns the residual.
pub fn orthogonalize(v: &CVector, basis: &[CVector]) -> CVector {
    let mut w = v.clone();
    for _ in 0..2 {
        for b in basis {
            let proj = b.dotc(&w);
            w -= b * proj;
        }
    }
    w
}

/// Appends to `basis` every candidate that is not already (numerically) in
/// its span, normalized, in candidate order. Stops once `limit` vectors are
/// present.
pub fn gram_schmidt_extend<'a>(
    basis: &mut Vec<CVector>,
    candidates: impl IntoIterator<Item = &'a CVector>,
    tol: f64,
    limit: usize,
) {
    for cand in candidates {
        if basis.len() >= limit {
            break;
        }
        let w = orthogonalize(cand, basis);
        let norm = w.norm();
        if norm > tol {
            basis.push(w / re(norm));
        }
    }
}

/// Sum of singular values.
pub fn trace_norm(m: &CMatrix) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.iter().sum()
}

/// Unitary `u` on `C^{dim}` that maps the orthonormal columns `from` onto
/// the orthonormal columns `to` and acts as the identity outside
/// `span(from ∪ to)`.
///
/// Inside that span the complement of `from` is sent onto the complement of
/// `to`, both completed by Gram–Schmidt over the span basis in index order,
/// so the result is deterministic.
pub fn isometry_completion(from: &[CVector], to: &[CVector], dim: usize) -> CMatrix {
    debug_assert_eq!(from.len(), to.len());
    let mut span: Vec<CVector> = Vec::new();
    gram_schmidt_extend(&mut span, from.iter().chain(to.iter()), 1e-10, dim);

    let mut comp_from: Vec<CVector> = from.to_vec();
    gram_schmidt_extend(&mut comp_from, span.iter(), 1e-8, span.len());
    let mut comp_to: Vec<CVector> = to.to_vec();
    gram_schmidt_extend(&mut comp_to, span.iter(), 1e-8, span.len());

    let s = columns_to_matrix(dim, &span);
    let a = columns_to_matrix(dim, &comp_from);
    let b = columns_to_matrix(dim, &comp_to);
    let mut u = identity(dim);
    u -= &s * s.adjoint();
    u += &b * a.adjoint();
    u
}

/// Unitary `u` maximizing `Re Tr(to^† u from)` for two `d × k` matrices.
///
/// This is the polar factor of `to · from^†`, computed through thin QR
/// factorizations so that only a `k × k` SVD is needed when `d ≫ k`.
pub fn polar_alignment(from: &CMatrix, to: &CMatrix) -> CMatrix {
    let d = from.nrows();
    assert_eq!(to.nrows(), d);
    assert_eq!(to.ncols(), from.ncols());

    let (q1, r1) = thin_qr(from);
    let (q2, r2) = thin_qr(to);
    let cross = &r2 * r1.adjoint();
    if cross.nrows() == 0 || cross.ncols() == 0 {
        return identity(d);
    }
    let svd = cross.svd(true, true);
    let w = svd.u.expect("requested u");
    let v_t = svd.v_t.expect("requested v_t");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cut = 1e-12 * smax.max(1e-300);

    let mut src = Vec::new();
    let mut dst = Vec::new();
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > cut {
            let v_i: CVector = v_t.row(i).adjoint();
            src.push(&q1 * v_i);
            dst.push(&q2 * w.column(i));
        }
    }
    isometry_completion(&src, &dst, d)
}

/// Thin QR with `q` having `min(rows, cols)` orthonormal columns.
pub fn thin_qr(m: &CMatrix) -> (CMatrix, CMatrix) {
    let qr = m.clone().qr();
    (qr.q(), qr.r())
}

/// Embeds a vector of probabilities as a diagonal matrix.
pub fn diag(values: &[f64]) -> CMatrix {
    let n = values.len();
    let mut m = CMatrix::zeros(n, n);
    for (i, &v) in values.iter().enumerate() {
        m[(i, i)] = re(v);
    }
    m
}

/// True when every off-diagonal entry is below `tol`.
pub fn is_diagonal(m: &CMatrix, tol: f64) -> bool {
    let n = m.nrows();
    for i in 0..n {
        for j in 0..m.ncols() {
            if i != j && m[(i, j)].norm() > tol {
                return false;
            }
        }
    }
    true
}

pub fn real_diagonal(m: &CMatrix) -> Vec<f64> {
    (0..m.nrows()).map(|i| m[(i, i)].re).collect()
}

/// Binary logarithm with the `0 log 0 = 0` convention baked into callers.
#[inline]
pub fn log2(x: f64) -> f64 {
    x.log2()
}
