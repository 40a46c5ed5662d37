//! `locent`: experiment runner for localizable entanglement.
//!
//! Exit codes: 0 success, 1 invalid input, 2 violated invariant, 3 solver failure.

mod commands;
mod config;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::{Flags, RunConfig, Scenario};

#[derive(Debug)]
pub enum Failure {
    Validation(String),
    Invariant(String),
    Solver(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Invariant(_) => 2,
            Failure::Solver(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Invariant(m) | Failure::Solver(m) => m,
        }
    }
}

impl From<locent::Error> for Failure {
    fn from(e: locent::Error) -> Self {
        match e {
            locent::Error::NoConvergence { .. } => Failure::Solver(e.to_string()),
            locent::Error::CertificateViolation(_) => Failure::Invariant(e.to_string()),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "locent", version, about = "Localizable entanglement experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// GHZ state: the estimate must equal 1.
    Ghz,
    /// Linear cluster state: zero correlations, unit entanglement.
    Cluster,
    /// Transverse Ising chain swept over the coupling grid.
    IsingSweep,
    /// Random three-qubit densities: one measurement never loses correlation.
    TheoremCheck,
    /// Bounds and estimate for every pair of a state read from a file.
    Bounds {
        /// Qubit count on the first line, then one `re im` line per amplitude.
        state_file: PathBuf,
    },
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var("LOCENT_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Failure::Validation(format!("invalid LOCENT_THREADS: {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::Validation(format!("thread pool: {e}")))
}

fn execute(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    let (scenario, state_file) = match cli.command {
        Command::Ghz => (Scenario::Ghz, None),
        Command::Cluster => (Scenario::Cluster, None),
        Command::IsingSweep => (Scenario::IsingSweep, None),
        Command::TheoremCheck => (Scenario::TheoremCheck, None),
        Command::Bounds { state_file } => (Scenario::Bounds, Some(state_file)),
    };
    let cfg = RunConfig::resolve(scenario, &cli.flags)?;
    let outcome = commands::run(&cfg, state_file.as_deref())?;
    let text = outcome.table.render(&cfg);
    match &cfg.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::Validation(format!("cannot write {}: {e}", path.display())))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Failure::Validation(format!("cannot write output: {e}")))?;
        }
    }
    outcome.failure.map_or(Ok(()), Err)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
