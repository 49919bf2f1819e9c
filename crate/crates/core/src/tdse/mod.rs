//! Time-dependent Schrödinger equation for the divided segment.
//!
//! A particle on `[-1, a(τ)]` with `V = −1` left of the origin and `V = 0`
//! right of it. A point barrier at `x = 0` of strength `α/(1−α)` separates
//! the two parts when `α = 1`. The right wall moves slowly with the schedule.
//! Space is discretized by second-order finite differences and time by
//! Crank–Nicolson.

mod eigen;
mod experiment;
mod grid;
mod hamiltonian;
mod propagate;
mod schedule;

use thiserror::Error;

use crate::levelmap::LevelMapError;
use crate::spectra::SpectrumError;

pub use eigen::{instantaneous_spectrum, lowest_eigenvalues, sturm_count, InstantaneousSpectrum};
pub use experiment::{
    checkpoint_taus, max_tracked_energy, predicted_level, run_period_experiment, Checkpoint,
    EnergySample, ExperimentOptions, PeriodReport,
};
pub use grid::{Grid, X_MIN};
pub use hamiltonian::{build_hamiltonian, build_hamiltonian_with, Hamiltonian, ALPHA_SPLIT};
pub use propagate::{populations, propagate, Propagator, WaveState, NORM_DRIFT_PER_TIME};
pub use schedule::{BarrierMode, Schedule};

#[derive(Debug, Error)]
pub enum TdseError {
    #[error("invalid parameter: {0}")]
    Domain(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("state has {state} nodes but spectrum has {spectrum}")]
    GridMismatch { state: usize, spectrum: usize },
    #[error("norm drifted by {drift:e} at t = {time}")]
    NormDrift { time: f64, drift: f64 },
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    LevelMap(#[from] LevelMapError),
}
