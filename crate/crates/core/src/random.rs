//! Seeded generators for random states, unitaries and distributions.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{c, re, CMatrix, CVector};
use crate::state::{DensityMatrix, PureState};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| c(gaussian(rng), gaussian(rng)))
}

/// Haar-distributed unitary (QR of a Ginibre matrix with the phase fix).
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    let qr = ginibre(rng, dim, dim).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { re(1.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn pure_state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> PureState {
    let v = CVector::from_fn(dim, |_, _| c(gaussian(rng), gaussian(rng)));
    PureState::normalized(v).expect("gaussian vector is non-zero")
}

/// Random density matrix of the given rank (induced measure).
pub fn density_matrix<R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> DensityMatrix {
    let g = ginibre(rng, dim, rank.clamp(1, dim));
    DensityMatrix::normalized(&g * g.adjoint()).expect("Wishart matrix is PSD")
}

/// Random full-rank density matrix.
pub fn full_rank_density<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityMatrix {
    density_matrix(rng, dim, dim)
}

/// Point drawn uniformly from the probability simplex.
pub fn distribution<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..len).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let s: f64 = w.iter().sum();
    for x in w.iter_mut() {
        *x /= s;
    }
    w
}

/// `U diag(p) U^†` for a given unitary; commuting pairs share `u`.
pub fn rotated_diagonal(u: &CMatrix, probs: &[f64]) -> DensityMatrix {
    let d = crate::linalg::diag(probs);
    DensityMatrix::new(u * d * u.adjoint()).expect("rotated distribution is a state")
}
