//! Pure states over a list of registers, stored as one amplitude vector in
//! big-endian mixed radix (register 0 is the most significant digit).

use crate::error::{Error, Result};
use crate::linalg::{check_dim, re, CMatrix, CVector};
use crate::state::{BipartitePureState, DensityMatrix, PureState};

#[derive(Debug, Clone, PartialEq)]
pub struct RegisterState {
    dims: Vec<usize>,
    amplitudes: CVector,
}

/// Offsets into the global vector of every joint value of `regs`, in the
/// big-endian order of `regs` as listed.
fn offsets(dims: &[usize], regs: &[usize]) -> Vec<usize> {
    let mut strides = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let mut out = vec![0usize];
    for &r in regs {
        let mut next = Vec::with_capacity(out.len() * dims[r]);
        for &o in &out {
            for v in 0..dims[r] {
                next.push(o + v * strides[r]);
            }
        }
        out = next;
    }
    out
}

fn complement(n: usize, regs: &[usize]) -> Vec<usize> {
    (0..n).filter(|i| !regs.contains(i)).collect()
}

impl RegisterState {
    /// Product of basis states, `values[i]` on register `i`.
    pub fn basis(dims: &[usize], values: &[usize]) -> Result<Self> {
        if dims.len() != values.len() || dims.iter().zip(values).any(|(d, v)| v >= d) {
            return Err(Error::Shape(format!("basis values {values:?} do not fit registers {dims:?}")));
        }
        let total = dims.iter().product::<usize>();
        check_dim(total)?;
        let idx = offsets(dims, &(0..dims.len()).collect::<Vec<_>>());
        let mut pos = 0;
        for (i, &v) in values.iter().enumerate() {
            pos = pos * dims[i] + v;
        }
        let mut amplitudes = CVector::zeros(total);
        amplitudes[idx[pos]] = re(1.0);
        Ok(RegisterState {
            dims: dims.to_vec(),
            amplitudes,
        })
    }

    /// `∑_v amp_v |v⟩` on `regs` (joint big-endian value `v`) times the basis
    /// state `values` elsewhere.
    pub fn with_superposition(dims: &[usize], regs: &[usize], amps: &CVector, values: &[usize]) -> Result<Self> {
        let mut s = RegisterState::basis(dims, values)?;
        let joint: usize = regs.iter().map(|&r| dims[r]).product();
        if amps.len() != joint {
            return Err(Error::Shape(format!("{} amplitudes for a {joint}-level superposition", amps.len())));
        }
        if regs.iter().any(|&r| values[r] != 0) {
            return Err(Error::Shape("superposed registers must start at zero".into()));
        }
        let base = s.amplitudes.iter().position(|a| a.norm() > 0.0).expect("basis state");
        s.amplitudes[base] = re(0.0);
        for (v, off) in offsets(dims, regs).into_iter().enumerate() {
            s.amplitudes[base + off] = amps[v];
        }
        Ok(s)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// Applies `u` to the joint space of `targets` (big-endian in the given
    /// order).
    pub fn apply(&mut self, targets: &[usize], u: &CMatrix) -> Result<()> {
        let joint: usize = targets.iter().map(|&r| self.dims[r]).product();
        if u.nrows() != joint || u.ncols() != joint {
            return Err(Error::Shape(format!(
                "operator is {}x{}, target registers span {joint}",
                u.nrows(),
                u.ncols()
            )));
        }
        let rest = complement(self.dims.len(), targets);
        let (t_off, r_off) = (offsets(&self.dims, targets), offsets(&self.dims, &rest));
        let x = CMatrix::from_fn(t_off.len(), r_off.len(), |t, r| self.amplitudes[t_off[t] + r_off[r]]);
        let y = u * x;
        for (t, &to) in t_off.iter().enumerate() {
            for (r, &ro) in r_off.iter().enumerate() {
                self.amplitudes[to + ro] = y[(t, r)];
            }
        }
        Ok(())
    }

    /// Coefficient matrix with the joint value of `rows` as row index and the
    /// remaining registers (ascending) as column index.
    fn split(&self, rows: &[usize]) -> CMatrix {
        let rest = complement(self.dims.len(), rows);
        let (a, b) = (offsets(&self.dims, rows), offsets(&self.dims, &rest));
        CMatrix::from_fn(a.len(), b.len(), |i, j| self.amplitudes[a[i] + b[j]])
    }

    /// View with `alice` registers (in the given order) as the first factor
    /// and all other registers (ascending) as the second.
    pub fn bipartite(&self, alice: &[usize]) -> Result<BipartitePureState> {
        BipartitePureState::from_coefficients(&self.split(alice))
    }

    /// Inverse of [`RegisterState::bipartite`].
    pub fn from_bipartite(dims: &[usize], alice: &[usize], s: &BipartitePureState) -> Result<Self> {
        let rest = complement(dims.len(), alice);
        let (a, b) = (offsets(dims, alice), offsets(dims, &rest));
        if a.len() != s.dim_a() || b.len() != s.dim_b() {
            return Err(Error::Shape(format!(
                "layout {}x{} does not match registers ({}x{})",
                s.dim_a(),
                s.dim_b(),
                a.len(),
                b.len()
            )));
        }
        let mut amplitudes = CVector::zeros(a.len() * b.len());
        let v = s.amplitudes();
        for (i, &ao) in a.iter().enumerate() {
            for (j, &bo) in b.iter().enumerate() {
                amplitudes[ao + bo] = v[i * s.dim_b() + j];
            }
        }
        Ok(RegisterState {
            dims: dims.to_vec(),
            amplitudes,
        })
    }

    /// Reduced state of `keep` (joint big-endian order as listed).
    pub fn reduced(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let m = self.split(keep);
        DensityMatrix::normalized(&m * m.adjoint())
    }

    /// Distribution of the joint value of `regs`.
    pub fn distribution(&self, regs: &[usize]) -> Vec<f64> {
        let m = self.split(regs);
        (0..m.nrows()).map(|i| m.row(i).norm_squared()).collect()
    }

    /// Unnormalized projection onto joint value `value` of `regs`.
    pub fn project(&self, regs: &[usize], value: usize) -> RegisterState {
        let rest = complement(self.dims.len(), regs);
        let a = offsets(&self.dims, regs);
        let mut out = CVector::zeros(self.amplitudes.len());
        for bo in offsets(&self.dims, &rest) {
            out[a[value] + bo] = self.amplitudes[a[value] + bo];
        }
        RegisterState {
            dims: self.dims.clone(),
            amplitudes: out,
        }
    }

    /// Rescales to unit norm; `None` for the zero vector.
    pub fn normalized(&self) -> Option<RegisterState> {
        let n = self.norm();
        (n > 0.0).then(|| RegisterState {
            dims: self.dims.clone(),
            amplitudes: &self.amplitudes / re(n),
        })
    }

    /// Appends a register in basis state `value`.
    pub fn push_register(&self, dim: usize, value: usize) -> Result<RegisterState> {
        check_dim(self.amplitudes.len() * dim)?;
        let mut out = CVector::zeros(self.amplitudes.len() * dim);
        for (i, a) in self.amplitudes.iter().enumerate() {
            out[i * dim + value] = *a;
        }
        let mut dims = self.dims.clone();
        dims.push(dim);
        Ok(RegisterState { dims, amplitudes: out })
    }

    pub fn to_pure(&self) -> Result<PureState> {
        PureState::new(self.amplitudes.clone())
    }
}
