//! `hpa-dyn <equilibria|stability|simulate|sweep> --config <path> [overrides]`
//!
//! Exit codes: 0 success, 2 config error, 3 numerical failure.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use config::{Overrides, RunConfig};
use error::CliError;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Equilibria,
    Stability,
    Simulate,
    Sweep,
}

#[derive(Debug, Parser)]
#[command(
    name = "hpa-dyn",
    version,
    about = "Equilibria, delay stability and simulation of the HPA-axis model"
)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON run configuration; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    cfg.apply(&cli.overrides);
    cfg.validate()?;
    match cli.command {
        Command::Equilibria => commands::cmd_equilibria(&cfg),
        Command::Stability => commands::cmd_stability(&cfg),
        Command::Simulate => commands::cmd_simulate(&cfg),
        Command::Sweep => commands::cmd_sweep(&cfg),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hpa-dyn: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
