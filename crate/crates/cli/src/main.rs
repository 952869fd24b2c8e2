//! `convlab`: run network simulations, compare configurations, replay the
//! attack matrix and self-test the crypto layer.
//!
//! Exit codes: 0 success, 2 configuration error, 3 simulation error,
//! 4 a directional QoS expectation failed, 5 attack matrix mismatch,
//! 6 self-test failure.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

#[derive(Debug, Parser)]
#[command(name = "convlab", version, about = "3G-WLAN authentication and QoS laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one simulation and write metric CSVs plus a manifest.
    Run(RunArgs),
    /// Run (or load) two configurations differing in one axis and compare them.
    Compare(CompareArgs),
    /// Replay the adversary harness and check the security-property matrix.
    Attack(AttackArgs),
    /// Run the cryptographic self-tests.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// Scenario file (`section.key = value` lines); defaults apply otherwise.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Random seed (overrides `sim.seed`).
    #[arg(long)]
    seed: Option<u64>,
    /// Simulated seconds (overrides `sim.duration_s`).
    #[arg(long)]
    duration: Option<f64>,
    /// Output directory; must not exist or be empty unless --force.
    #[arg(long)]
    out: PathBuf,
    /// Replace an existing output directory.
    #[arg(long)]
    force: bool,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    /// aka | ecdh-aka (overrides `auth.protocol`).
    #[arg(long)]
    protocol: Option<String>,
    /// loose | tight | hybrid (overrides `topology.coupling`).
    #[arg(long)]
    coupling: Option<String>,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[command(flatten)]
    common: Common,
    /// One protocol, or an `A,B` pair to compare (default `ecdh-aka,aka`).
    #[arg(long)]
    protocol: Option<String>,
    /// One coupling mode, or an `A,B` pair to compare.
    #[arg(long)]
    coupling: Option<String>,
    /// Compare two earlier `run` output directories instead of simulating.
    #[arg(long, value_name = "DIR_A,DIR_B")]
    runs: Option<String>,
}

#[derive(Debug, Args)]
struct AttackArgs {
    /// aka | ecdh-aka; both when omitted.
    #[arg(long)]
    protocol: Option<String>,
    /// Directory for attack_report.txt and attack_report.csv.
    #[arg(long)]
    out: PathBuf,
    /// Replace an existing output directory.
    #[arg(long)]
    force: bool,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    /// Seed for the randomised checks.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Also write the report to `<out>/validate.txt`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replace an existing output directory.
    #[arg(long)]
    force: bool,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("simulation error: {0}")]
    Runtime(String),
    #[error("I/O error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) | CliError::Io { .. } => 3,
        }
    }
}

/// Non-error outcomes that still map to a failing exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Ok,
    ExpectationFailed,
    MatrixMismatch,
    SelfTestFailed,
}

impl Verdict {
    fn code(self) -> u8 {
        match self {
            Verdict::Ok => 0,
            Verdict::ExpectationFailed => 4,
            Verdict::MatrixMismatch => 5,
            Verdict::SelfTestFailed => 6,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => commands::run(a),
        Command::Compare(a) => commands::compare(a),
        Command::Attack(a) => commands::attack(a),
        Command::Validate(a) => commands::validate(a),
    };
    match result {
        Ok(v) => ExitCode::from(v.code()),
        Err(e) => {
            eprintln!("convlab: {e}");
            ExitCode::from(e.code())
        }
    }
}
