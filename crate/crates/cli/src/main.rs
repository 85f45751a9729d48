use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use qsc_cli::{execute, ExperimentConfig, Format, Mode, Params, Suite};

/// Run string-commitment experiments and report one row per check.
#[derive(Debug, Parser)]
#[command(name = "qsc", version)]
struct Args {
    #[arg(long, value_enum)]
    suite: Suite,
    /// Protocol file (JSON) for the protocol suites.
    #[arg(long)]
    protocol: Option<PathBuf>,
    /// Ensemble file (JSON) for the measures suite.
    #[arg(long)]
    ensemble: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long = "b-sent")]
    b_sent: Option<usize>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Slack for every check, replacing the per-check defaults.
    #[arg(long)]
    tol: Option<f64>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let config = ExperimentConfig {
        suite: args.suite,
        params: Params {
            n: args.n,
            epsilon: args.epsilon,
            b_sent: args.b_sent,
            r: args.r,
            mode: args.mode,
            trials: args.trials,
            seed: args.seed,
            tol: args.tol,
        },
        protocol: args.protocol,
        ensemble: args.ensemble,
        output: args.out,
        format: args.format,
    };
    match execute(&config) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
