//! `spingeo`: batch driver for the spinor-geometry toolkit.
//!
//! Exit codes: 0 success, 1 a check failed or a solve found nothing, 2 bad
//! input or I/O failure.

mod classify;
mod grid;
mod identities;
mod radial;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use spingeo_core::Error;

#[derive(Parser, Debug)]
#[command(name = "spingeo", version, about = "Spinor bilinears, induced tetrads and their identities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug, Clone)]
pub struct RunConfig {
    /// Input document.
    #[arg(long)]
    pub input: PathBuf,
    /// Output file (identities, classify) or directory (grid-analyze,
    /// radial-solve).
    #[arg(long)]
    pub output: PathBuf,
    /// Seed for the random-spinor suites.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Tolerance override, repeatable.
    #[arg(long = "tol", value_name = "NAME=VAL", value_parser = parse_tolerance)]
    pub tolerances: Vec<(String, f64)>,
}

impl RunConfig {
    pub fn tolerance(&self, names: &[&str], default: f64) -> f64 {
        for name in names {
            if let Some((_, v)) = self.tolerances.iter().rev().find(|(n, _)| n == name) {
                return *v;
            }
        }
        default
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Randomized algebraic, covariance, tetrad and Majorana identity suites.
    Identities(RunConfig),
    /// Residual fields of a spinor field on a grid, or a refinement study.
    GridAnalyze(RunConfig),
    /// Stationary radial bound state, optionally with the self-consistent loop.
    RadialSolve(RunConfig),
    /// Light-front and Majorana classification of a list of spinors.
    Classify(RunConfig),
}

fn parse_tolerance(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or_else(|| format!("expected NAME=VAL, got {s:?}"))?;
    let v: f64 = value.parse().map_err(|e| format!("bad tolerance {value:?}: {e}"))?;
    if !(v >= 0.0) {
        return Err(format!("tolerance must be non-negative, got {v}"));
    }
    Ok((name.to_string(), v))
}

/// Outcome of a command that ran to completion.
pub enum Outcome {
    Pass,
    Fail(String),
}

fn configure_threads() -> Result<(), String> {
    if let Ok(v) = std::env::var("SPINGEO_THREADS") {
        let n: usize = v.parse().map_err(|_| format!("SPINGEO_THREADS must be a positive integer, got {v:?}"))?;
        if n == 0 {
            return Err("SPINGEO_THREADS must be at least 1".into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let result = match &cli.command {
        Command::Identities(c) => identities::run(c),
        Command::GridAnalyze(c) => grid::run(c),
        Command::RadialSolve(c) => radial::run(c),
        Command::Classify(c) => classify::run(c),
    };
    match result {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// Solver outcomes that are not input problems map to 1.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NoRootInBracket { .. } | Error::DivergenceDetected { .. } | Error::NoRegularSolution { .. } => 1,
        _ => 2,
    }
}

pub fn create_dir(path: &std::path::Path) -> spingeo_core::Result<()> {
    std::fs::create_dir_all(path).map_err(|source| Error::File { path: path.display().to_string(), source })
}
