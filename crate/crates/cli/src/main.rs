// `!(a < b)` is used on purpose so that NaN fails every bound.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Simulator and condition checker for the maturation-delay model.
#[derive(Debug, Parser)]
#[command(name = "stemdde", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate the model and write the trajectory CSV.
    Simulate(Common),
    /// Run the hypothesis, Lipschitz and derivative checks.
    Check(Common),
    /// Run the derivative check alone.
    Derivcheck(Common),
    /// List constant solutions.
    Equilibria(Common),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Run configuration (TOML).
    #[arg(long, short)]
    config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long, env = "STEMDDE_OUT_DIR")]
    out: Option<PathBuf>,
    /// RNG seed for sampled checks; overrides `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Make the initial history compatible before integrating.
    #[arg(long)]
    auto_compat: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match &cli.command {
        Command::Simulate(c) => commands::simulate(c),
        Command::Check(c) => commands::check(c),
        Command::Derivcheck(c) => commands::derivcheck(c),
        Command::Equilibria(c) => commands::equilibria(c),
    };
    ExitCode::from(code as u8)
}
