//! Numerical experiments: the classical separation between ξ and χ, the
//! commuting comparison of the two, and parallel repetition.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bits::BitString;
use crate::classical::{self, chi_xi_streaming};
use crate::corpus::{separation_peak, separation_row};
use crate::ensemble::{Ensemble, EnsembleEntry, EnsembleState};
use crate::error::{Error, Result};
use crate::measures::{asymptotic_rate, holevo_chi, xi_information, Measure};
use crate::protocol::{concealing_parameter, post_commit_ensemble, Protocol};
use crate::random;

/// Slack on the separation bounds and the commuting comparison.
pub const EXPERIMENT_TOL: f64 = 1e-8;
/// Required agreement between `χ` of two copies and twice `χ` of one.
pub const ADDITIVITY_TOL: f64 = 1e-7;

fn check_separation_args(n: usize, epsilon: f64) -> Result<f64> {
    if !(2..=14).contains(&n) {
        return Err(Error::Domain(format!("separation needs 2 ≤ n ≤ 14, got {n}")));
    }
    separation_peak(n, epsilon)
}

/// Uniformly weighted classical ensemble whose `x`-th member puts mass
/// `2^{−εn/2}` on `x` and spreads the rest evenly.
pub fn build_separation_ensemble(n: usize, epsilon: f64) -> Result<Ensemble> {
    let peak = check_separation_args(n, epsilon)?;
    let dim = 1usize << n;
    let weight = 1.0 / dim as f64;
    let entries = BitString::all(n)
        .map(|label| EnsembleEntry {
            prob: weight,
            label,
            state: EnsembleState::Diagonal(separation_row(n, label.value(), peak)),
        })
        .collect();
    let e = Ensemble::new(n, entries)?;
    let rows = e.diagonal_rows().expect("diagonal members");
    let avg = classical::average(&e.weights(), &rows);
    if let Some(dev) = avg.iter().map(|v| (v - weight).abs()).find(|d| *d > 1e-12) {
        return Err(Error::CrossCheck(format!("average deviates from uniform by {dev:.3e}")));
    }
    Ok(e)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparationResult {
    pub n: usize,
    pub epsilon: f64,
    pub xi: f64,
    pub chi: f64,
    /// `n(1 − ε)`.
    pub xi_floor: f64,
    /// `2^{−εn/2} n (1 − ε/2)`.
    pub chi_ceiling: f64,
    /// Largest single-member term `D(P_x‖P)` of χ.
    pub max_chi_term: f64,
}

impl SeparationResult {
    pub fn xi_ok(&self) -> bool {
        self.xi >= self.xi_floor - EXPERIMENT_TOL
    }

    pub fn chi_ok(&self) -> bool {
        self.chi <= self.chi_ceiling + EXPERIMENT_TOL && self.max_chi_term <= self.chi_ceiling + EXPERIMENT_TOL
    }
}

/// Exact ξ and χ of the separation ensemble, with rows generated on the fly.
pub fn run_separation_experiment(n: usize, epsilon: f64) -> Result<SeparationResult> {
    let peak = check_separation_args(n, epsilon)?;
    let dim = 1usize << n;
    let weights = vec![1.0 / dim as f64; dim];
    let rest = (1.0 - peak) / (dim - 1) as f64;
    let fill = |x: usize, buf: &mut [f64]| {
        buf.fill(rest);
        buf[x] = peak;
    };
    let (chi, xi) = chi_xi_streaming(n, &weights, dim, fill);
    let uniform = vec![1.0 / dim as f64; dim];
    let mut buf = vec![0.0; dim];
    let mut max_chi_term: f64 = 0.0;
    for x in 0..dim {
        fill(x, &mut buf);
        max_chi_term = max_chi_term.max(classical::relative_entropy_on_support(&buf, &uniform));
    }
    Ok(SeparationResult {
        n,
        epsilon,
        xi,
        chi,
        xi_floor: n as f64 * (1.0 - epsilon),
        chi_ceiling: peak * n as f64 * (1.0 - epsilon / 2.0),
        max_chi_term,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommutingSweep {
    pub trials: usize,
    pub violations: usize,
    /// Smallest observed `ξ − χ`.
    pub min_gap: f64,
}

/// Random uniformly weighted diagonal ensembles of 2 to 8 members in
/// dimension `dim`, comparing ξ with χ.
pub fn run_commuting_xi_chi_sweep(trials: usize, dim: usize, seed: u64) -> Result<CommutingSweep> {
    if dim == 0 || dim > 16 {
        return Err(Error::Domain(format!("sweep dimension must be in 1..=16, got {dim}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0;
    let mut min_gap = f64::INFINITY;
    for _ in 0..trials {
        let n_bits = rng.random_range(1..=3);
        let states = (0..1usize << n_bits)
            .map(|_| EnsembleState::Diagonal(random::distribution(&mut rng, dim)))
            .collect();
        let e = Ensemble::from_states(n_bits, &vec![1.0 / (1usize << n_bits) as f64; 1 << n_bits], states)?;
        let gap = xi_information(&e)? - holevo_chi(&e)?;
        if gap < -EXPERIMENT_TOL {
            violations += 1;
        }
        min_gap = min_gap.min(gap);
    }
    Ok(CommutingSweep {
        trials,
        violations,
        min_gap,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParallelResult {
    pub n: usize,
    /// χ concealing value of one copy.
    pub b1: f64,
    /// χ of the explicitly built two-copy ensemble; `None` when it does not
    /// fit the dense cap.
    pub b2: Option<f64>,
    /// `(m, rate)` pairs in the order given.
    pub rates: Vec<(usize, f64)>,
    /// `n − b1`.
    pub limit: f64,
}

impl ParallelResult {
    pub fn analytic_only(&self) -> bool {
        self.b2.is_none()
    }

    pub fn additive(&self) -> bool {
        self.b2.is_none_or(|b2| (b2 - 2.0 * self.b1).abs() <= ADDITIVITY_TOL)
    }

    /// Rates increase with `m` (for `m` sorted ascending) and never exceed
    /// the limit.
    pub fn monotone(&self) -> bool {
        let mut sorted = self.rates.clone();
        sorted.sort_by_key(|&(m, _)| m);
        sorted.windows(2).all(|w| w[1].1 >= w[0].1) && sorted.iter().all(|&(_, r)| r <= self.limit + 1e-12)
    }
}

/// Concealing value of one and two copies of `p`, and the per-copy binding
/// rate forced on `m` copies.
pub fn run_parallel_repetition_experiment(p: &Protocol, m_values: &[usize]) -> Result<ParallelResult> {
    let single = post_commit_ensemble(p)?;
    let b1 = concealing_parameter(p, Measure::Chi)?;
    let b2 = match single.tensor(&single) {
        Ok(pair) => Some(holevo_chi(&pair)?),
        Err(Error::Size { .. }) => None,
        Err(e) => return Err(e),
    };
    let n = p.n_bits();
    let rates = m_values
        .iter()
        .map(|&m| asymptotic_rate(n, b1, m).map(|r| (m, r)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ParallelResult {
        n,
        b1,
        b2,
        rates,
        limit: n as f64 - b1,
    })
}
