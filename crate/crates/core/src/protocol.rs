//! Two-phase string commitment protocols over named registers.
//!
//! Every register has an owner that changes only when a step sends it. The
//! input string lives in Alice's input registers, which honest steps may
//! read (as controls) but never disturb or send, so Bob's view after the
//! commit phase from the superposition `∑ √p_x |x⟩` is the average of his
//! views for each `x`.

use crate::bits::BitString;
use crate::ensemble::{Ensemble, EnsembleState};
use crate::error::{Error, Result};
use crate::linalg::{check_dim, re, unitarity_defect, CMatrix, CVector};
use crate::attack::AttackReport;
use crate::measures::{measure, tradeoff_lhs, Measure};
use crate::registers::RegisterState;
use crate::state::{BipartitePureState, DensityMatrix, Party, Povm, STATE_TOL, UNITARY_TOL};

/// Steps must keep the global vector normalized to this precision.
pub const NORM_TOL: f64 = 1e-10;
/// Honest runs must leave the input register in its basis state to this
/// precision.
pub const INPUT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Register {
    pub name: String,
    pub dim: usize,
    /// Owner at the start of the protocol.
    pub owner: Party,
}

impl Register {
    pub fn new(name: impl Into<String>, dim: usize, owner: Party) -> Self {
        Register {
            name: name.into(),
            dim,
            owner,
        }
    }
}

/// A unitary applied by `actor` to registers it holds, after which the
/// registers in `send` pass to the other party.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub actor: Party,
    pub targets: Vec<usize>,
    pub unitary: CMatrix,
    pub send: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Commit,
    Reveal,
}

#[derive(Debug, Clone)]
pub struct Protocol {
    name: String,
    n_bits: usize,
    registers: Vec<Register>,
    input: Vec<usize>,
    commit: Vec<Step>,
    reveal: Vec<Step>,
    povm: Povm,
    distribution: Vec<f64>,
    commit_owners: Vec<Party>,
    final_owners: Vec<Party>,
}

fn owned_by(owners: &[Party], party: Party) -> Vec<usize> {
    (0..owners.len()).filter(|&i| owners[i] == party).collect()
}

impl Protocol {
    /// Validates and assembles a protocol. `povm` acts on Bob's final
    /// registers (ascending index order); element `y` accepts string `y`
    /// and the last element is abort.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        n_bits: usize,
        registers: Vec<Register>,
        input: Vec<usize>,
        commit: Vec<Step>,
        reveal: Vec<Step>,
        povm: Povm,
        distribution: Vec<f64>,
    ) -> Result<Self> {
        let name = name.into();
        if let Some(r) = registers.iter().find(|r| r.dim == 0) {
            return Err(Error::Validation(format!("register {} has dimension 0", r.name)));
        }
        let total = registers.iter().try_fold(1usize, |acc, r| acc.checked_mul(r.dim));
        check_dim(total.unwrap_or(usize::MAX))?;

        let input_dim: usize = input.iter().map(|&i| registers.get(i).map_or(0, |r| r.dim)).product();
        if input_dim != 1usize << n_bits || input.iter().any(|&i| registers[i].owner != Party::Alice) {
            return Err(Error::Validation(format!(
                "input registers must be Alice's and span 2^{n_bits} values (got {input_dim})"
            )));
        }

        let mut owners: Vec<Party> = registers.iter().map(|r| r.owner).collect();
        let mut commit_owners = owners.clone();
        for (phase, steps) in [("commit", &commit), ("reveal", &reveal)] {
            for (i, step) in steps.iter().enumerate() {
                validate_step(step, &registers, &owners, &input)
                    .map_err(|e| Error::Validation(format!("{phase} step {i}: {e}")))?;
                for &s in &step.send {
                    owners[s] = step.actor.other();
                }
            }
            if phase == "commit" {
                commit_owners = owners.clone();
            }
        }
        let final_owners = owners;

        if povm.len() != (1usize << n_bits) + 1 {
            return Err(Error::Validation(format!(
                "expected {} labeled POVM elements plus abort, got {} elements",
                1usize << n_bits,
                povm.len()
            )));
        }
        let bob_dim: usize = owned_by(&final_owners, Party::Bob).iter().map(|&i| registers[i].dim).product();
        if povm.dim() != bob_dim {
            return Err(Error::Shape(format!(
                "POVM acts on dimension {}, Bob's final registers span {bob_dim}",
                povm.dim()
            )));
        }

        if distribution.len() != 1usize << n_bits {
            return Err(Error::Validation(format!(
                "input distribution has {} entries, expected {}",
                distribution.len(),
                1usize << n_bits
            )));
        }
        let s: f64 = distribution.iter().sum();
        if distribution.iter().any(|p| !(*p >= 0.0)) || (s - 1.0).abs() > STATE_TOL {
            return Err(Error::Validation(format!("input distribution is invalid (sum {s})")));
        }

        Ok(Protocol {
            name,
            n_bits,
            registers,
            input,
            commit,
            reveal,
            povm,
            distribution,
            commit_owners,
            final_owners,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn dims(&self) -> Vec<usize> {
        self.registers.iter().map(|r| r.dim).collect()
    }

    pub fn input_registers(&self) -> &[usize] {
        &self.input
    }

    pub fn steps(&self, phase: Phase) -> &[Step] {
        match phase {
            Phase::Commit => &self.commit,
            Phase::Reveal => &self.reveal,
        }
    }

    pub fn povm(&self) -> &Povm {
        &self.povm
    }

    pub fn distribution(&self) -> &[f64] {
        &self.distribution
    }

    /// Registers held by `party` once the commit phase is over.
    pub fn after_commit(&self, party: Party) -> Vec<usize> {
        owned_by(&self.commit_owners, party)
    }

    /// Registers Bob measures at the end.
    pub fn bob_final(&self) -> Vec<usize> {
        owned_by(&self.final_owners, Party::Bob)
    }

    /// `|x⟩` on the input registers, every other register at 0.
    pub fn initial_state(&self, x: BitString) -> Result<RegisterState> {
        self.check_label(x)?;
        let mut amps = CVector::zeros(1usize << self.n_bits);
        amps[x.value()] = re(1.0);
        self.superposition(&amps)
    }

    /// `∑_x amps_x |x⟩` on the input registers.
    pub fn superposition(&self, amps: &CVector) -> Result<RegisterState> {
        let dims = self.dims();
        RegisterState::with_superposition(&dims, &self.input, amps, &vec![0; dims.len()])
    }

    fn check_label(&self, x: BitString) -> Result<()> {
        if x.len() != self.n_bits {
            return Err(Error::Shape(format!("input {x} has {} bits, expected {}", x.len(), self.n_bits)));
        }
        Ok(())
    }

    /// Runs one phase in place.
    pub fn run_phase(&self, state: &mut RegisterState, phase: Phase) -> Result<()> {
        for (i, step) in self.steps(phase).iter().enumerate() {
            state.apply(&step.targets, &step.unitary)?;
            let norm = state.norm();
            if (norm - 1.0).abs() > NORM_TOL {
                return Err(Error::Validation(format!("step {i} left the state with norm {norm}")));
            }
        }
        Ok(())
    }

    /// Bob's final state for a run that has completed the reveal phase.
    pub fn bob_final_state(&self, state: &RegisterState) -> Result<DensityMatrix> {
        state.reduced(&self.bob_final())
    }

    /// Outcome probabilities of Bob's check: entry `y` for string `y`,
    /// last entry for abort.
    pub fn outcome_probabilities(&self, state: &RegisterState) -> Result<Vec<f64>> {
        Ok(self.povm.probabilities(&self.bob_final_state(state)?))
    }

    /// Alice/Bob split of a post-commit register state.
    pub fn commit_split(&self, state: &RegisterState) -> Result<BipartitePureState> {
        state.bipartite(&self.after_commit(Party::Alice))
    }

    fn input_probability(&self, state: &RegisterState, x: BitString) -> f64 {
        state.distribution(&self.input)[x.value()]
    }
}

fn validate_step(step: &Step, registers: &[Register], owners: &[Party], input: &[usize]) -> std::result::Result<(), String> {
    let mut seen = Vec::new();
    for &t in &step.targets {
        if t >= registers.len() {
            return Err(format!("register index {t} out of range"));
        }
        if seen.contains(&t) {
            return Err(format!("register {} targeted twice", registers[t].name));
        }
        if owners[t] != step.actor {
            return Err(format!("{} acts on {}, which it does not hold", step.actor, registers[t].name));
        }
        seen.push(t);
    }
    let joint: usize = step.targets.iter().map(|&t| registers[t].dim).product();
    if step.unitary.nrows() != joint || step.unitary.ncols() != joint {
        return Err(format!(
            "unitary is {}x{}, targets span {joint}",
            step.unitary.nrows(),
            step.unitary.ncols()
        ));
    }
    let defect = unitarity_defect(&step.unitary);
    if defect > UNITARY_TOL {
        return Err(format!("operator is not unitary (max |U†U − I| = {defect:.3e})"));
    }
    for &s in &step.send {
        if s >= registers.len() || owners[s] != step.actor {
            return Err(format!("{} cannot send register index {s}", step.actor));
        }
        if input.contains(&s) {
            return Err(format!("input register {} may not be sent", registers[s].name));
        }
    }
    Ok(())
}

/// Intermediate and final objects of an honest run on input `x`.
#[derive(Debug, Clone)]
pub struct HonestRunResult {
    pub post_commit: RegisterState,
    pub post_commit_global: BipartitePureState,
    pub bob_post_commit: DensityMatrix,
    pub post_reveal_bob: DensityMatrix,
    /// `Tr M_y ρ_x` indexed by `y`.
    pub accept_probs: Vec<f64>,
    pub abort_prob: f64,
}

pub fn run_honest(p: &Protocol, x: BitString) -> Result<HonestRunResult> {
    let mut state = p.initial_state(x)?;
    p.run_phase(&mut state, Phase::Commit)?;
    check_input(p, &state, x, "commit")?;
    let post_commit = state.clone();
    let post_commit_global = p.commit_split(&state)?;
    let bob_post_commit = state.reduced(&p.after_commit(Party::Bob))?;
    p.run_phase(&mut state, Phase::Reveal)?;
    check_input(p, &state, x, "reveal")?;
    let post_reveal_bob = p.bob_final_state(&state)?;
    let mut accept_probs = p.povm().probabilities(&post_reveal_bob);
    let abort_prob = accept_probs.pop().expect("abort element");
    Ok(HonestRunResult {
        post_commit,
        post_commit_global,
        bob_post_commit,
        post_reveal_bob,
        accept_probs,
        abort_prob,
    })
}

fn check_input(p: &Protocol, state: &RegisterState, x: BitString, phase: &str) -> Result<()> {
    let kept = p.input_probability(state, x);
    if kept < 1.0 - INPUT_TOL {
        return Err(Error::Validation(format!(
            "{phase} phase disturbs the input register (|{x}⟩ retained with probability {kept})"
        )));
    }
    Ok(())
}

/// Largest deviation of honest acceptance from `Tr M_y ρ_x = [x = y]`.
pub fn correctness_defect(p: &Protocol) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for x in BitString::all(p.n_bits()) {
        let run = run_honest(p, x)?;
        for (y, &prob) in run.accept_probs.iter().enumerate() {
            let want = if y == x.value() { 1.0 } else { 0.0 };
            worst = worst.max((prob - want).abs());
        }
    }
    Ok(worst)
}

/// Bob's post-commit states `σ_x` weighted by the input distribution.
pub fn post_commit_ensemble(p: &Protocol) -> Result<Ensemble> {
    let states = BitString::all(p.n_bits())
        .map(|x| run_honest(p, x).map(|r| EnsembleState::Dense(r.bob_post_commit)))
        .collect::<Result<Vec<_>>>()?;
    Ensemble::from_states(p.n_bits(), p.distribution(), states)
}

/// How much Bob learns at commit time, in the chosen measure.
pub fn concealing_parameter(p: &Protocol, which: Measure) -> Result<f64> {
    measure(&post_commit_ensemble(p)?, which)
}

/// `n + log₂ ∑_c p_c p̃_c`: the smallest binding parameter consistent with
/// the observed attack.
pub fn binding_parameter_from_attack(p: &Protocol, report: &AttackReport) -> Result<f64> {
    if report.entries.is_empty() {
        return Err(Error::Domain("attack report has no entries".into()));
    }
    let total: f64 = report.entries.iter().map(|e| p.distribution()[e.c.value()] * e.p_tilde).sum();
    Ok(p.n_bits() as f64 + total.log2())
}

/// Observed binding and concealing values set against the trade-off.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TradeoffAudit {
    pub a: f64,
    pub b: f64,
    pub lhs: f64,
    pub n: usize,
    pub pass: bool,
}

/// Slack on `n ≤ lhs(a, b)`.
pub const TRADEOFF_TOL: f64 = 1e-6;

impl TradeoffAudit {
    pub fn evaluate(n: usize, a: f64, b: f64, which: Measure) -> Result<Self> {
        let lhs = tradeoff_lhs(a, b, which)?;
        Ok(TradeoffAudit {
            a,
            b,
            lhs,
            n,
            pass: n as f64 <= lhs + TRADEOFF_TOL,
        })
    }
}

pub fn verify_tradeoff(p: &Protocol, report: &AttackReport, which: Measure) -> Result<TradeoffAudit> {
    let a = binding_parameter_from_attack(p, report)?;
    let b = concealing_parameter(p, which)?;
    TradeoffAudit::evaluate(p.n_bits(), a, b, which)
}
