//! JSON formats for ensembles and protocols.
//!
//! Matrices are row-major arrays of `[re, im]` pairs. A protocol file
//! either names a built-in protocol or describes four registers: the input
//! `x` (dimension `2^n`), Alice's ancilla `a`, a message register `m` that
//! starts with Alice, and Bob's private register `b`. A step acts on every
//! register its actor holds, in that order, and may then send `m`; the
//! checking measurement acts on what Bob holds at the end.

use std::fs;
use std::path::Path;

use qsc_core::bits::BitString;
use qsc_core::corpus;
use qsc_core::ensemble::{Ensemble, EnsembleEntry, EnsembleState};
use qsc_core::linalg::{c, CMatrix};
use qsc_core::protocol::{Protocol, Register, Step};
use qsc_core::state::{DensityMatrix, Party, Povm};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub type Matrix = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateSpec {
    Diag(Vec<f64>),
    Matrix(Matrix),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntrySpec {
    pub prob: f64,
    pub label: String,
    pub state: StateSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleFile {
    pub n_bits: usize,
    pub entries: Vec<EntrySpec>,
}

pub fn to_matrix(m: &Matrix) -> Result<CMatrix, String> {
    let rows = m.len();
    if let Some((i, row)) = m.iter().enumerate().find(|(_, r)| r.len() != rows) {
        return Err(format!("matrix row {i} has {} entries, expected {rows}", row.len()));
    }
    Ok(CMatrix::from_fn(rows, rows, |i, j| c(m[i][j][0], m[i][j][1])))
}

pub fn from_matrix(m: &CMatrix) -> Matrix {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

impl EnsembleFile {
    pub fn build(&self) -> Result<Ensemble, CliError> {
        let entries = self
            .entries
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let invalid = |msg: String| CliError::Invalid(format!("entry {i}: {msg}"));
                let label: BitString = e.label.parse().map_err(|err| invalid(format!("{err}")))?;
                let state = match &e.state {
                    StateSpec::Diag(p) => EnsembleState::Diagonal(p.clone()),
                    StateSpec::Matrix(m) => EnsembleState::Dense(
                        DensityMatrix::new(to_matrix(m).map_err(invalid)?).map_err(|err| invalid(err.to_string()))?,
                    ),
                };
                Ok(EnsembleEntry {
                    prob: e.prob,
                    label,
                    state,
                })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        Ok(Ensemble::new(self.n_bits, entries)?)
    }

    pub fn from_ensemble(e: &Ensemble) -> Self {
        let entries = e
            .entries()
            .iter()
            .map(|en| EntrySpec {
                prob: en.prob,
                label: en.label.to_string(),
                state: match &en.state {
                    EnsembleState::Diagonal(p) => StateSpec::Diag(p.clone()),
                    EnsembleState::Dense(rho) => StateSpec::Matrix(from_matrix(rho.matrix())),
                },
            })
            .collect();
        EnsembleFile {
            n_bits: e.n_bits(),
            entries,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str, path: &Path) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| {
        CliError::Parse(format!("{}: line {}, column {}: {e}", path.display(), e.line(), e.column()))
    })
}

pub fn load_ensemble(path: &Path) -> Result<Ensemble, CliError> {
    parse::<EnsembleFile>(&read(path)?, path)?.build()
}

pub fn save_ensemble(e: &Ensemble, path: &Path) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(&EnsembleFile::from_ensemble(e)).expect("serializable");
    fs::write(path, text + "\n").map_err(|err| CliError::Io(format!("{}: {err}", path.display())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Actor {
    Alice,
    Bob,
}

impl From<Actor> for Party {
    fn from(a: Actor) -> Party {
        match a {
            Actor::Alice => Party::Alice,
            Actor::Bob => Party::Bob,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepSpec {
    pub actor: Actor,
    pub matrix: Matrix,
    /// Pass the message register to the other party after this step.
    #[serde(default)]
    pub send: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PovmSpec {
    /// Element `y` accepts string `y`.
    pub elements: Vec<Matrix>,
    pub abort: Matrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DistributionSpec {
    Named(String),
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BuiltinName {
    Prefix,
    RandomPrefix,
    Nothing,
    Separation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuiltinSpec {
    pub name: BuiltinName,
    pub n: usize,
    #[serde(default)]
    pub b_sent: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

impl BuiltinSpec {
    pub fn build(&self) -> Result<Protocol, CliError> {
        Ok(match self.name {
            BuiltinName::Prefix => corpus::prefix(self.n, self.b_sent)?,
            BuiltinName::RandomPrefix => corpus::random_prefix(self.n, self.b_sent)?,
            BuiltinName::Nothing => corpus::nothing(self.n)?,
            BuiltinName::Separation => corpus::separation(self.n, self.epsilon.unwrap_or(0.5))?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplicitProtocol {
    pub n_bits: usize,
    #[serde(default = "one")]
    pub alice_ancilla_dim: usize,
    #[serde(default = "one")]
    pub message_dim: usize,
    pub bob_dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distribution: Option<DistributionSpec>,
    #[serde(default)]
    pub commit_steps: Vec<StepSpec>,
    #[serde(default)]
    pub reveal_steps: Vec<StepSpec>,
    pub povm: PovmSpec,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProtocolFile {
    Builtin { builtin: BuiltinSpec },
    Explicit(ExplicitProtocol),
}

const X: usize = 0;
const A: usize = 1;
const M: usize = 2;
const B: usize = 3;

impl ExplicitProtocol {
    pub fn build(&self) -> Result<Protocol, CliError> {
        let n = self.n_bits;
        if n == 0 || n > 20 {
            return Err(CliError::Invalid(format!("n_bits must be in 1..=20, got {n}")));
        }
        let registers = vec![
            Register::new("x", 1 << n, Party::Alice),
            Register::new("a", self.alice_ancilla_dim, Party::Alice),
            Register::new("m", self.message_dim, Party::Alice),
            Register::new("b", self.bob_dim, Party::Bob),
        ];
        let mut message_owner = Party::Alice;
        let mut steps = |specs: &[StepSpec], phase: &str| -> Result<Vec<Step>, CliError> {
            specs
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    let actor: Party = s.actor.into();
                    let mut targets: Vec<usize> = match actor {
                        Party::Alice => vec![X, A],
                        Party::Bob => vec![],
                    };
                    if message_owner == actor {
                        targets.push(M);
                    }
                    if actor == Party::Bob {
                        targets.push(B);
                    }
                    if s.send && message_owner != actor {
                        return Err(CliError::Invalid(format!("{phase} step {i}: {actor} does not hold the message")));
                    }
                    let unitary =
                        to_matrix(&s.matrix).map_err(|e| CliError::Invalid(format!("{phase} step {i}: {e}")))?;
                    let send = if s.send {
                        message_owner = actor.other();
                        vec![M]
                    } else {
                        vec![]
                    };
                    Ok(Step {
                        actor,
                        targets,
                        unitary,
                        send,
                    })
                })
                .collect()
        };
        let commit = steps(&self.commit_steps, "commit")?;
        let reveal = steps(&self.reveal_steps, "reveal")?;

        let mut elements = self
            .povm
            .elements
            .iter()
            .enumerate()
            .map(|(y, m)| to_matrix(m).map_err(|e| CliError::Invalid(format!("POVM element {y}: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        elements.push(to_matrix(&self.povm.abort).map_err(|e| CliError::Invalid(format!("abort element: {e}")))?);
        let povm = Povm::new(elements)?;

        let distribution = match &self.distribution {
            None => vec![1.0 / (1u64 << n) as f64; 1 << n],
            Some(DistributionSpec::Named(s)) if s == "uniform" => vec![1.0 / (1u64 << n) as f64; 1 << n],
            Some(DistributionSpec::Named(s)) => {
                return Err(CliError::Invalid(format!("unknown distribution {s:?}")));
            }
            Some(DistributionSpec::Explicit(p)) => p.clone(),
        };
        Ok(Protocol::new("file", n, registers, vec![X], commit, reveal, povm, distribution)?)
    }
}

impl ProtocolFile {
    pub fn build(&self) -> Result<Protocol, CliError> {
        match self {
            ProtocolFile::Builtin { builtin } => builtin.build(),
            ProtocolFile::Explicit(p) => p.build(),
        }
    }
}

#[derive(Deserialize)]
struct BuiltinFile {
    builtin: BuiltinSpec,
}

pub fn load_protocol_file(path: &Path) -> Result<ProtocolFile, CliError> {
    let text = read(path)?;
    let value: serde_json::Value = parse(&text, path)?;
    if value.get("builtin").is_some() {
        Ok(ProtocolFile::Builtin {
            builtin: parse::<BuiltinFile>(&text, path)?.builtin,
        })
    } else {
        Ok(ProtocolFile::Explicit(parse(&text, path)?))
    }
}

pub fn load_protocol(path: &Path) -> Result<Protocol, CliError> {
    load_protocol_file(path)?.build()
}

pub fn save_protocol_file(p: &ProtocolFile, path: &Path) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(p).expect("serializable");
    fs::write(path, text + "\n").map_err(|err| CliError::Io(format!("{}: {err}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn projector(d: usize, k: usize) -> Matrix {
        (0..d)
            .map(|i| (0..d).map(|j| [if i == j && i == k { 1.0 } else { 0.0 }, 0.0]).collect())
            .collect()
    }

    #[test]
    fn builtin_parses() {
        let f: ProtocolFile = serde_json::from_str(r#"{"builtin": {"name": "prefix", "n": 4, "b_sent": 2}}"#).unwrap();
        assert_eq!(f.build().unwrap().name(), "prefix(n=4,b=2)");
    }

    #[test]
    fn explicit_protocol_targets_follow_the_message() {
        // Alice copies x into m and sends it at reveal
        let copy = qsc_core::corpus::cnot();
        let p = ExplicitProtocol {
            n_bits: 1,
            alice_ancilla_dim: 1,
            message_dim: 2,
            bob_dim: 1,
            distribution: None,
            commit_steps: vec![],
            reveal_steps: vec![StepSpec {
                actor: Actor::Alice,
                matrix: from_matrix(&copy),
                send: true,
            }],
            povm: PovmSpec {
                elements: vec![projector(2, 0), projector(2, 1)],
                abort: vec![vec![[0.0, 0.0]; 2]; 2],
            },
        };
        let built = p.build().unwrap();
        assert!(qsc_core::protocol::correctness_defect(&built).unwrap() < 1e-12);
    }
}
