//! Alice's cheating strategy against a string commitment.
//!
//! She commits to the superposition `∑_x √w_x |x⟩`, so Bob holds the
//! average `ρ_B = ∑ w_x ρ_x`. For a target `c` she decomposes `ρ_B` around
//! `ρ_c`, rotates her side (input, ancillas and one fresh flag qubit) onto
//! the purification of that decomposition, and reveals honestly as if she
//! had committed to `c`. The flag-1 branch then carries a state close to the
//! honest commitment to `c`.

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::linalg::{re, CMatrix, CVector};
use crate::measures::{divergence_information, divergence_radius, observational_divergence, Radius};
use crate::protocol::{post_commit_ensemble, run_honest, HonestRunResult, Phase, Protocol};
use crate::registers::RegisterState;
use crate::state::{apply_local_unchecked, DensityMatrix, Party};
use crate::substate::{build_decomposition, k_budget, weight_floor, SubstateDecomposition, SubstateMode};
use crate::transition::transition_unitary;

/// Bob's committed state from the superposition must match the weighted
/// average of his honest views to this precision (largest entry).
pub const AVERAGE_TOL: f64 = 1e-8;
/// Agreement between the direct success probability and the sum over flag
/// branches.
pub const BRANCH_TOL: f64 = 1e-8;
/// Slack on the per-target success floor.
pub const FLOOR_TOL: f64 = 1e-6;
/// Convergence tolerance for the worst-case mixture weights.
pub const RADIUS_TOL: f64 = 1e-9;

/// `1 + 1/b` for `b > 15`, `1 + 1/15` otherwise.
pub fn choose_r(b: f64) -> f64 {
    if b > 15.0 {
        1.0 + 1.0 / b
    } else {
        1.0 + 1.0 / 15.0
    }
}

/// Guaranteed success `(1 − 1/r) 2^{−r k} (1 − 1/√r)` for a target with
/// divergence budget `k`.
pub fn success_floor(r: f64, k: f64) -> f64 {
    weight_floor(r, k) * (1.0 - 1.0 / r.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttackKind {
    /// Superposition weighted by the input distribution.
    Average,
    /// Superposition weighted by the divergence-radius mixture.
    WorstCase,
}

#[derive(Debug, Clone)]
pub struct AttackEntry {
    pub c: BitString,
    /// `D(ρ_c‖ρ_B)`.
    pub divergence: f64,
    pub k: f64,
    pub r: f64,
    /// Probability that the flag reads 1 after Alice's rotation.
    pub p_flag: f64,
    /// Probability that Bob accepts `c`.
    pub p_tilde: f64,
    pub bound: f64,
    /// Why the entry failed, if it did.
    pub failure: Option<String>,
}

impl AttackEntry {
    pub fn failed(&self) -> bool {
        self.failure.is_some()
    }
}

#[derive(Debug, Clone)]
pub struct AttackReport {
    pub protocol: String,
    pub kind: AttackKind,
    pub mode: SubstateMode,
    pub r: f64,
    /// Concealing value that fixed `r`: divergence information for the
    /// average attack, the radius for the worst case.
    pub b: f64,
    pub superposition_weights: Vec<f64>,
    pub radius: Option<Radius>,
    pub entries: Vec<AttackEntry>,
}

impl AttackReport {
    pub fn any_failed(&self) -> bool {
        self.entries.iter().any(AttackEntry::failed)
    }
}

/// Everything that does not depend on the target.
struct Setup {
    honest: Vec<HonestRunResult>,
    /// Register state after committing to the superposition.
    committed: RegisterState,
    alice: Vec<usize>,
    rho_b: DensityMatrix,
    weights: Vec<f64>,
}

fn setup(p: &Protocol, weights: Vec<f64>) -> Result<Setup> {
    let honest = BitString::all(p.n_bits()).map(|x| run_honest(p, x)).collect::<Result<Vec<_>>>()?;
    let amps = CVector::from_iterator(weights.len(), weights.iter().map(|w| re(w.max(0.0).sqrt())));
    let mut committed = p.superposition(&amps)?;
    p.run_phase(&mut committed, Phase::Commit)?;
    let alice = p.after_commit(Party::Alice);
    let rho_b = committed.reduced(&p.after_commit(Party::Bob))?;

    let dim = rho_b.dim();
    let mut avg = CMatrix::zeros(dim, dim);
    for (w, run) in weights.iter().zip(&honest) {
        avg += run.bob_post_commit.matrix() * re(*w);
    }
    let dev = crate::linalg::max_abs(&(rho_b.matrix() - avg));
    if dev > AVERAGE_TOL {
        return Err(Error::CrossCheck(format!(
            "committed superposition leaves Bob a state {dev:.3e} away from the weighted average"
        )));
    }
    Ok(Setup {
        honest,
        committed,
        alice,
        rho_b,
        weights,
    })
}

/// The rotated register state for one target, flag appended as the last
/// register.
struct Rotated {
    decomposition: SubstateDecomposition,
    unitary: CMatrix,
    state: RegisterState,
    alice: Vec<usize>,
    flag: usize,
}

fn rotate(p: &Protocol, s: &Setup, c: BitString, r: f64, mode: SubstateMode) -> Result<Rotated> {
    let run = &s.honest[c.value()];
    let decomposition = build_decomposition(&run.bob_post_commit, &s.rho_b, &run.post_commit_global, r, mode)?;
    let source = s.committed.bipartite(&s.alice)?.with_alice_register(2, 0);
    let unitary = transition_unitary(&source, &decomposition.tau_bar, Party::Alice)?;
    let rotated = apply_local_unchecked(&source, &unitary, Party::Alice);

    let mut dims = p.dims();
    let flag = dims.len();
    dims.push(2);
    let mut alice = s.alice.clone();
    alice.push(flag);
    let state = RegisterState::from_bipartite(&dims, &alice, &rotated)?;
    Ok(Rotated {
        decomposition,
        unitary,
        state,
        alice,
        flag,
    })
}

/// Unnormalized Bob acceptance probabilities for a sub-normalized state.
fn weighted_outcomes(p: &Protocol, state: &RegisterState) -> Result<Vec<f64>> {
    let norm2 = state.norm().powi(2);
    match state.normalized() {
        Some(s) if norm2 > 1e-300 => Ok(p.outcome_probabilities(&s)?.into_iter().map(|q| q * norm2).collect()),
        _ => Ok(vec![0.0; p.povm().len()]),
    }
}

fn attack_entry(p: &Protocol, s: &Setup, c: BitString, r: f64, mode: SubstateMode) -> Result<AttackEntry> {
    let mut rot = rotate(p, s, c, r, mode)?;
    let p_flag = rot.state.distribution(&[rot.flag])[1];
    p.run_phase(&mut rot.state, Phase::Reveal)?;
    let p_tilde = p.outcome_probabilities(&rot.state)?[c.value()];

    let branches: f64 = (0..2)
        .map(|f| weighted_outcomes(p, &rot.state.project(&[rot.flag], f)).map(|o| o[c.value()]))
        .sum::<Result<f64>>()?;
    if (branches - p_tilde).abs() > BRANCH_TOL {
        return Err(Error::CrossCheck(format!(
            "success probability {p_tilde} disagrees with the flag-branch total {branches}"
        )));
    }
    let d = &rot.decomposition;
    Ok(AttackEntry {
        c,
        divergence: d.divergence,
        k: d.k,
        r,
        p_flag,
        p_tilde,
        bound: success_floor(r, d.k),
        failure: None,
    })
}

fn failed_entry(s: &Setup, c: BitString, r: f64, err: Error) -> AttackEntry {
    let divergence = observational_divergence(&s.honest[c.value()].bob_post_commit, &s.rho_b)
        .map(|d| d.value)
        .unwrap_or(f64::INFINITY);
    let k = k_budget(divergence).unwrap_or(f64::INFINITY);
    AttackEntry {
        c,
        divergence,
        k,
        r,
        p_flag: 0.0,
        p_tilde: 0.0,
        bound: success_floor(r, k),
        failure: Some(err.to_string()),
    }
}

fn run_attack(
    p: &Protocol,
    kind: AttackKind,
    weights: Vec<f64>,
    b: f64,
    radius: Option<Radius>,
    mode: SubstateMode,
    r_override: Option<f64>,
) -> Result<AttackReport> {
    let r = r_override.unwrap_or_else(|| choose_r(b));
    let s = setup(p, weights)?;
    let budget = radius.as_ref().map(|rad| k_budget(rad.radius)).transpose()?;
    let entries = BitString::all(p.n_bits())
        .map(|c| {
            let mut entry = attack_entry(p, &s, c, r, mode).unwrap_or_else(|e| failed_entry(&s, c, r, e));
            if entry.failure.is_none() {
                if mode == SubstateMode::Truncated && entry.p_tilde < entry.bound - FLOOR_TOL {
                    entry.failure = Some(format!("success {} below the floor {}", entry.p_tilde, entry.bound));
                }
                if let Some(budget) = budget {
                    if entry.k > budget + FLOOR_TOL {
                        entry.failure = Some(format!("budget {} exceeds the radius budget {budget}", entry.k));
                    }
                }
            }
            entry
        })
        .collect();
    Ok(AttackReport {
        protocol: p.name().to_string(),
        kind,
        mode,
        r,
        b,
        superposition_weights: s.weights,
        radius,
        entries,
    })
}

/// Attack from the superposition weighted by the input distribution.
pub fn run_average_attack(p: &Protocol, mode: SubstateMode, r_override: Option<f64>) -> Result<AttackReport> {
    let b = divergence_information(&post_commit_ensemble(p)?)?;
    run_attack(p, AttackKind::Average, p.distribution().to_vec(), b, None, mode, r_override)
}

/// Attack from the superposition weighted by the mixture that minimizes the
/// largest divergence from Bob's committed states.
pub fn run_worst_case_attack(p: &Protocol, mode: SubstateMode, r_override: Option<f64>) -> Result<AttackReport> {
    let states = post_commit_ensemble(p)?.dense_states()?;
    let radius = divergence_radius(&states, RADIUS_TOL)?;
    let b = radius.radius;
    run_attack(p, AttackKind::WorstCase, radius.weights.clone(), b, Some(radius), mode, r_override)
}

#[derive(Debug, Clone)]
pub struct RollbackEntry {
    pub c: BitString,
    /// Probability that the flag reads 1.
    pub r_c: f64,
    /// Probability that Bob accepts some string on the flag-1 branch.
    pub success_branch_accept: f64,
    /// Given flag 0: probability that Bob accepts the string `x′` Alice
    /// reads off her input register after undoing her rotation.
    pub recover_prob: f64,
    /// Distribution of `x′` on the rolled-back branch.
    pub rollback_strings: Vec<f64>,
    /// Probability that Bob does not abort overall.
    pub total_safe: f64,
}

/// Runs the attack on target `c`, and on flag 0 undoes the rotation,
/// measures the input register and reveals the string it shows.
pub fn run_rollback(p: &Protocol, c: BitString, mode: SubstateMode, r_override: Option<f64>) -> Result<RollbackEntry> {
    let b = divergence_information(&post_commit_ensemble(p)?)?;
    let r = r_override.unwrap_or_else(|| choose_r(b));
    let s = setup(p, p.distribution().to_vec())?;
    let rot = rotate(p, &s, c, r, mode)?;
    let abort = p.povm().len() - 1;

    let flagged = rot.state.project(&[rot.flag], 1);
    let r_c = flagged.norm().powi(2);
    let success_branch_accept = match flagged.normalized() {
        Some(mut st) if r_c > 1e-14 => {
            p.run_phase(&mut st, Phase::Reveal)?;
            1.0 - p.outcome_probabilities(&st)?[abort]
        }
        _ => 0.0,
    };

    let unflagged = rot.state.project(&[rot.flag], 0);
    let (recover_prob, rollback_strings) = match unflagged.normalized() {
        Some(st) if 1.0 - r_c > 1e-14 => {
            let undone = apply_local_unchecked(&st.bipartite(&rot.alice)?, &rot.unitary.adjoint(), Party::Alice);
            let undone = RegisterState::from_bipartite(st.dims(), &rot.alice, &undone)?;
            let input = p.input_registers();
            let strings = undone.distribution(input);
            let mut recover = 0.0;
            for (x, &q) in strings.iter().enumerate() {
                if q < 1e-15 {
                    continue;
                }
                let mut branch = undone.project(input, x).normalized().expect("nonzero branch");
                p.run_phase(&mut branch, Phase::Reveal)?;
                recover += q * (1.0 - p.outcome_probabilities(&branch)?[abort]);
            }
            (recover, strings)
        }
        _ => (1.0, vec![0.0; 1 << p.n_bits()]),
    };

    Ok(RollbackEntry {
        c,
        r_c,
        success_branch_accept,
        recover_prob,
        rollback_strings,
        total_safe: r_c * success_branch_accept + (1.0 - r_c) * recover_prob,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    #[test]
    fn r_schedule() {
        assert!((choose_r(20.0) - 1.05).abs() < 1e-15);
        assert!((choose_r(3.0) - 16.0 / 15.0).abs() < 1e-15);
        assert!((choose_r(15.0) - 16.0 / 15.0).abs() < 1e-15);
    }

    #[test]
    fn nothing_sent_is_a_total_break() {
        let p = corpus::nothing(2).unwrap();
        let report = run_average_attack(&p, SubstateMode::Exact, None).unwrap();
        for e in &report.entries {
            assert!(!e.failed(), "{:?}", e.failure);
            assert!((e.p_tilde - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn prefix_exact_attack_succeeds_with_half() {
        let p = corpus::prefix(3, 1).unwrap();
        let report = run_average_attack(&p, SubstateMode::Exact, None).unwrap();
        for e in &report.entries {
            assert!(!e.failed(), "{:?}", e.failure);
            assert!((e.p_tilde - 0.5).abs() < 1e-9, "{} {}", e.c, e.p_tilde);
            assert!((e.p_flag - 0.5).abs() < 1e-9);
        }
    }

    #[test]
    fn prefix_truncated_attack_meets_the_floor() {
        let p = corpus::prefix(4, 2).unwrap();
        let report = run_average_attack(&p, SubstateMode::Truncated, None).unwrap();
        assert!((report.r - 16.0 / 15.0).abs() < 1e-12);
        for e in &report.entries {
            assert!(!e.failed(), "{:?}", e.failure);
            assert!(e.p_tilde >= e.bound - FLOOR_TOL);
        }
    }

    #[test]
    fn worst_case_on_random_prefix() {
        let p = corpus::random_prefix(3, 1).unwrap();
        let report = run_worst_case_attack(&p, SubstateMode::Exact, None).unwrap();
        let r = report.radius.as_ref().unwrap();
        assert!((r.radius - 1.0).abs() < 1e-6);
        for w in &report.superposition_weights {
            assert!((w - 0.125).abs() < 1e-4);
        }
        for e in &report.entries {
            assert!(!e.failed(), "{:?}", e.failure);
            assert!((e.p_tilde - 0.5).abs() < 1e-6);
        }
    }

    #[test]
    fn rollback_on_prefix_exact() {
        let p = corpus::prefix(2, 1).unwrap();
        for c in BitString::all(2) {
            let rb = run_rollback(&p, c, SubstateMode::Exact, None).unwrap();
            assert!((rb.r_c - 0.5).abs() < 1e-9);
            assert!((rb.recover_prob - 1.0).abs() < 1e-9, "{}", rb.recover_prob);
            // on flag 0 Bob holds the other prefix, and x′ agrees with it
            for (x, &q) in rb.rollback_strings.iter().enumerate() {
                assert!((x >> 1) != (c.value() >> 1) || q < 1e-12);
            }
        }
    }

    #[test]
    fn rollback_on_nothing_sent() {
        let p = corpus::nothing(2).unwrap();
        let rb = run_rollback(&p, "10".parse().unwrap(), SubstateMode::Exact, None).unwrap();
        assert!((rb.r_c - 1.0).abs() < 1e-12 && (rb.total_safe - 1.0).abs() < 1e-9);
    }
}
