use std::path::PathBuf;
use std::process::ExitCode;

use adiabatic_cli::{exit, run_command, CliError, CommandKind, ExperimentConfig};
use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "adiabatic",
    version,
    about = "Level renumbering under slow periodic separation and reconnection"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output.directory`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// RNG seed; overrides `seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Print nothing on success.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Per-level map table and trajectories.
    Levelmap,
    /// Forward and backward trajectories with return statistics.
    Trajectory,
    /// Monte Carlo gain estimate and per-seed slope table.
    Montecarlo,
    /// One period of the Schrödinger equation.
    Tdse,
    /// Parse and validate the configuration only.
    ValidateConfig,
}

impl From<Command> for CommandKind {
    fn from(c: Command) -> Self {
        match c {
            Command::Levelmap => CommandKind::Levelmap,
            Command::Trajectory => CommandKind::Trajectory,
            Command::Montecarlo => CommandKind::Montecarlo,
            Command::Tdse => CommandKind::Tdse,
            Command::ValidateConfig => CommandKind::ValidateConfig,
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config <path> is required".into()))?;
    let mut config =
        ExperimentConfig::load(path).with_context(|| format!("loading {}", path.display()))?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    let out = cli
        .out
        .clone()
        .unwrap_or_else(|| config.output.directory.clone());
    let kind = CommandKind::from(cli.command);
    let summary =
        run_command(kind, &config, &out).with_context(|| format!("running {}", kind.name()))?;
    if !cli.quiet {
        for line in &summary.lines {
            println!("{line}");
        }
        if let Some(m) = &summary.manifest {
            println!("outputs in {} (manifest {})", out.display(), m.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::from(exit::SUCCESS as u8),
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = err
                .downcast_ref::<CliError>()
                .map_or(exit::IO, CliError::exit_code);
            ExitCode::from(code as u8)
        }
    }
}
