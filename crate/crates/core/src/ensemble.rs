use std::collections::HashSet;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::state::{tensor, DensityMatrix, STATE_TOL};

/// A member state, stored either as a probability vector (commuting
/// ensembles, no dimension cap) or as a dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum EnsembleState {
    Diagonal(Vec<f64>),
    Dense(DensityMatrix),
}

impl EnsembleState {
    pub fn dim(&self) -> usize {
        match self {
            EnsembleState::Diagonal(p) => p.len(),
            EnsembleState::Dense(m) => m.dim(),
        }
    }

    /// The diagonal when the state is diagonal in the computational basis.
    pub fn as_diagonal(&self) -> Option<Vec<f64>> {
        match self {
            EnsembleState::Diagonal(p) => Some(p.clone()),
            EnsembleState::Dense(m) if m.is_diagonal() => Some(m.diagonal_values()),
            EnsembleState::Dense(_) => None,
        }
    }

    pub fn to_density(&self) -> Result<DensityMatrix> {
        match self {
            EnsembleState::Diagonal(p) => {
                linalg::check_dim(p.len())?;
                DensityMatrix::diagonal(p)
            }
            EnsembleState::Dense(m) => Ok(m.clone()),
        }
    }
}

impl From<DensityMatrix> for EnsembleState {
    fn from(m: DensityMatrix) -> Self {
        EnsembleState::Dense(m)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleEntry {
    pub prob: f64,
    pub label: BitString,
    pub state: EnsembleState,
}

/// Probability-weighted family of states indexed by `n_bits`-bit labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    n_bits: usize,
    entries: Vec<EnsembleEntry>,
}

fn validate_distribution(p: &[f64], what: &str) -> Result<()> {
    if let Some(i) = p.iter().position(|x| !x.is_finite() || *x < -STATE_TOL) {
        return Err(Error::Validation(format!("{what}: entry {i} is {} (must be a non-negative number)", p[i])));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > STATE_TOL {
        return Err(Error::Validation(format!(
            "{what}: probabilities sum to {s} (deficit {:e})",
            1.0 - s
        )));
    }
    Ok(())
}

impl Ensemble {
    pub fn new(n_bits: usize, entries: Vec<EnsembleEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Validation("ensemble has no entries".into()));
        }
        let dim = entries[0].state.dim();
        let mut seen = HashSet::new();
        for (i, e) in entries.iter().enumerate() {
            if !e.prob.is_finite() || e.prob < 0.0 {
                return Err(Error::Validation(format!("entry {i}: probability {} is negative", e.prob)));
            }
            if e.label.len() != n_bits {
                return Err(Error::Validation(format!(
                    "entry {i}: label {} has {} bits, expected {n_bits}",
                    e.label,
                    e.label.len()
                )));
            }
            if !seen.insert(e.label) {
                return Err(Error::Validation(format!("entry {i}: duplicate label {}", e.label)));
            }
            if e.state.dim() != dim {
                return Err(Error::Shape(format!(
                    "entry {i}: state dimension {} differs from {dim}",
                    e.state.dim()
                )));
            }
            if let EnsembleState::Diagonal(p) = &e.state {
                validate_distribution(p, &format!("entry {i} state"))?;
            }
        }
        let probs: Vec<f64> = entries.iter().map(|e| e.prob).collect();
        validate_distribution(&probs, "ensemble weights")?;
        Ok(Ensemble { n_bits, entries })
    }

    /// Ensemble over all `n_bits`-bit labels in numeric order.
    pub fn from_states(n_bits: usize, probs: &[f64], states: Vec<EnsembleState>) -> Result<Self> {
        if probs.len() != states.len() || states.len() != 1usize << n_bits {
            return Err(Error::Shape(format!(
                "expected {} weights and states, got {} and {}",
                1usize << n_bits,
                probs.len(),
                states.len()
            )));
        }
        let entries = BitString::all(n_bits)
            .zip(probs.iter().zip(states))
            .map(|(label, (&prob, state))| EnsembleEntry { prob, label, state })
            .collect();
        Ensemble::new(n_bits, entries)
    }

    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    pub fn entries(&self) -> &[EnsembleEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.entries[0].state.dim()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.prob).collect()
    }

    /// Member diagonals when every state is diagonal.
    pub fn diagonal_rows(&self) -> Option<Vec<Vec<f64>>> {
        self.entries.iter().map(|e| e.state.as_diagonal()).collect()
    }

    pub fn dense_states(&self) -> Result<Vec<DensityMatrix>> {
        self.entries.iter().map(|e| e.state.to_density()).collect()
    }

    /// `∑ p_x ρ_x` as a dense matrix.
    pub fn average(&self) -> Result<DensityMatrix> {
        linalg::check_dim(self.dim())?;
        let mut avg = CMatrix::zeros(self.dim(), self.dim());
        for e in &self.entries {
            match &e.state {
                EnsembleState::Diagonal(p) => {
                    for (i, &v) in p.iter().enumerate() {
                        avg[(i, i)] += linalg::re(e.prob * v);
                    }
                }
                EnsembleState::Dense(m) => avg += m.matrix() * linalg::re(e.prob),
            }
        }
        DensityMatrix::normalized(avg)
    }

    /// Pairwise tensor product with product weights and concatenated labels.
    pub fn tensor(&self, other: &Ensemble) -> Result<Ensemble> {
        let n_bits = self.n_bits + other.n_bits;
        let mut entries = Vec::with_capacity(self.len() * other.len());
        for a in &self.entries {
            for b in &other.entries {
                let state = match (&a.state, &b.state) {
                    (EnsembleState::Diagonal(p), EnsembleState::Diagonal(q)) => EnsembleState::Diagonal(
                        p.iter().flat_map(|&x| q.iter().map(move |&y| x * y)).collect(),
                    ),
                    _ => EnsembleState::Dense(tensor(&a.state.to_density()?, &b.state.to_density()?)?),
                };
                let label = BitString::new((a.label.value() << other.n_bits) | b.label.value(), n_bits)?;
                entries.push(EnsembleEntry {
                    prob: a.prob * b.prob,
                    label,
                    state,
                });
            }
        }
        Ensemble::new(n_bits, entries)
    }
}
