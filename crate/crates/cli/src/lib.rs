//! Configuration, file formats and subcommands behind the `adiabatic` binary.

pub mod commands;
pub mod config;
pub mod output;
pub mod spectra_file;

use std::path::PathBuf;

use adiabatic_core::stochastic::StochasticError;
use adiabatic_core::tdse::TdseError;
use adiabatic_core::{LevelMapError, SpectrumError};
use thiserror::Error;

pub use commands::{run_command, CommandKind, RunSummary};
pub use config::ExperimentConfig;
pub use spectra_file::{export_user_spectra, load_user_spectra};

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const IO: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const NUMERIC: i32 = 3;
    pub const TRUNCATION: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    LevelMap(#[from] LevelMapError),
    #[error(transparent)]
    Stochastic(#[from] StochasticError),
    #[error(transparent)]
    Tdse(#[from] TdseError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        let level_map = |e: &LevelMapError| {
            if e.is_truncation() || matches!(e, LevelMapError::Overflow) {
                exit::TRUNCATION
            } else {
                exit::NUMERIC
            }
        };
        match self {
            CliError::Config(_) | CliError::Parse { .. } | CliError::Spectrum(_) => exit::CONFIG,
            CliError::LevelMap(e) => level_map(e),
            CliError::Stochastic(StochasticError::Domain { .. } | StochasticError::NoTrials) => {
                exit::CONFIG
            }
            CliError::Stochastic(StochasticError::Unresolved { .. }) => exit::TRUNCATION,
            CliError::Stochastic(StochasticError::LevelMap(e)) => level_map(e),
            CliError::Tdse(TdseError::Domain(_)) => exit::CONFIG,
            CliError::Tdse(TdseError::LevelMap(e)) => level_map(e),
            CliError::Tdse(_) => exit::NUMERIC,
            CliError::Io { .. } | CliError::Csv(_) | CliError::Json(_) => exit::IO,
        }
    }
}
