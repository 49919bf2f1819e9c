//! Adiabatic level renumbering under periodic separation and reconnection.
//!
//! A slowly driven system that is split into two non-communicating parts for
//! a portion of each period keeps its within-group quantum number while the
//! groups are apart, so the energy-ordered level number changes from period
//! to period even though no transition between instantaneous levels occurs.
//!
//! * [`indicator`] and [`levelmap`]: the combinatorial renumbering map and
//!   trajectories of level numbers.
//! * [`spectra`]: spectra of the divided segment and the spin-½ oscillator,
//!   and arbitrary user spectra.
//! * [`stochastic`]: Bernoulli indicator sequences and the per-period
//!   logarithmic growth rate.
//! * [`tdse`]: a Crank–Nicolson propagator for the divided segment that
//!   checks the combinatorial prediction against the wave equation.

pub mod indicator;
pub mod levelmap;
pub mod spectra;
pub mod stochastic;
pub mod tdse;

pub use indicator::{Group, IndicatorSequence, IndicatorSource};
pub use levelmap::{
    entropy, group_index, growth_rate, position_of, AdiabaticLevelMap, Classification,
    LevelMapError, LevelTrajectory,
};
pub use spectra::{SegmentModelParams, SpectralSnapshot, SpectrumError, SpinModelParams};
