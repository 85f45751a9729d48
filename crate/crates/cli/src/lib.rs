//! Batch runner for the commitment experiments: file formats, suites and
//! the flat report they all write.

pub mod files;
pub mod report;
pub mod suites;

use std::path::PathBuf;

pub use report::{Format, Row};
pub use suites::{run_suite, Suite};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] qsc_core::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Mode {
    Exact,
    Truncated,
}

impl From<Mode> for qsc_core::substate::SubstateMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Exact => qsc_core::substate::SubstateMode::Exact,
            Mode::Truncated => qsc_core::substate::SubstateMode::Truncated,
        }
    }
}

/// Optional knobs; each suite falls back to its own defaults.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Params {
    pub n: Option<usize>,
    pub epsilon: Option<f64>,
    pub b_sent: Option<usize>,
    pub r: Option<f64>,
    pub mode: Option<Mode>,
    pub trials: Option<usize>,
    pub seed: u64,
    /// Replaces every check's default slack.
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub suite: Suite,
    pub params: Params,
    pub protocol: Option<PathBuf>,
    pub ensemble: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub format: Format,
}

/// Runs the configured suite and writes its report. Returns whether every
/// check passed.
pub fn execute(config: &ExperimentConfig) -> Result<bool, CliError> {
    let rows = run_suite(config)?;
    let text = report::render(&rows, config.format);
    match &config.output {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    Ok(rows.iter().all(|r| r.pass))
}
