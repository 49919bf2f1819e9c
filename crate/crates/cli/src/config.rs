//! TOML experiment configuration. Unknown keys are rejected.
//!
//! ```toml
//! model = "segment"   # segment | spin | bernoulli | user-spectra | tdse
//! seed = 0
//!
//! [segment]
//! a1 = 1.0
//! a2 = 3.0
//! levels = 100
//!
//! [trajectory]
//! k0 = [2, 3]
//! step_limit = 100
//! escape_threshold = 10000
//! ```
//!
//! Every section is optional and falls back to the defaults of its type.

use std::path::{Path, PathBuf};

use adiabatic_core::stochastic::{Backend, BernoulliParams, LlnOptions, Realization};
use adiabatic_core::tdse::{BarrierMode, ExperimentOptions, Grid, Schedule};
use adiabatic_core::{SegmentModelParams, SpinModelParams};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Levels resolved by finite closed-form or user spectra are stored densely;
/// this bounds their size.
pub const MAX_DENSE_LEVELS: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    Segment,
    Spin,
    Bernoulli,
    UserSpectra,
    Tdse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: Model,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub segment: SegmentSection,
    #[serde(default)]
    pub spin: SpinSection,
    #[serde(default)]
    pub bernoulli: BernoulliSection,
    #[serde(default)]
    pub user_spectra: UserSpectraSection,
    #[serde(default)]
    pub trajectory: TrajectorySection,
    #[serde(default)]
    pub tdse: TdseSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SegmentSection {
    pub a1: f64,
    pub a2: f64,
    /// Rows in the level-map table.
    pub levels: u64,
}

impl Default for SegmentSection {
    fn default() -> Self {
        Self {
            a1: 1.0,
            a2: 3.0,
            levels: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpinSection {
    pub b1: f64,
    pub b2: f64,
    pub levels: u64,
}

impl Default for SpinSection {
    fn default() -> Self {
        Self {
            b1: -0.25,
            b2: 0.75,
            levels: 50,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RealizationChoice {
    #[default]
    Fresh,
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackendChoice {
    #[default]
    Dense,
    RandomAccess,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BernoulliSection {
    pub beta: f64,
    pub gamma: f64,
    pub stream_id: u64,
    /// Rows in the level-map table.
    pub levels: u64,
    pub k_start: u64,
    pub trials: u64,
    pub backend: BackendChoice,
    /// Number of consecutive seeds, starting at the run seed, in the slope table.
    pub lln_seeds: u64,
    pub lln_k0: u64,
    pub lln_periods: usize,
    pub realization: RealizationChoice,
    pub common_stream: bool,
}

impl Default for BernoulliSection {
    fn default() -> Self {
        Self {
            beta: 0.5,
            gamma: 0.25,
            stream_id: 0,
            levels: 1000,
            k_start: 100_000,
            trials: 10_000,
            backend: BackendChoice::Dense,
            lln_seeds: 50,
            lln_k0: 100,
            lln_periods: 200,
            realization: RealizationChoice::Fresh,
            common_stream: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UserSpectraSection {
    /// Relative paths are resolved against the config file's directory.
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrajectorySection {
    pub k0: Vec<u64>,
    pub step_limit: usize,
    pub escape_threshold: u64,
}

impl Default for TrajectorySection {
    fn default() -> Self {
        Self {
            k0: Vec::new(),
            step_limit: 100,
            escape_threshold: 10_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleKind {
    #[default]
    Toy,
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BarrierChoice {
    #[default]
    Repulsive,
    Attractive,
    Off,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TdseSection {
    pub schedule: ScheduleKind,
    pub k0: usize,
    pub epsilon: f64,
    pub n_points: usize,
    /// Minimal right end of the grid.
    pub extent: f64,
    pub levels: usize,
    pub dt_factor: f64,
    pub energy_samples: usize,
    pub period: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub a1: f64,
    pub a2: f64,
    pub alpha_ramp: f64,
    pub barrier: BarrierChoice,
    /// Wall position of the identity schedule.
    pub identity_a: f64,
}

impl Default for TdseSection {
    fn default() -> Self {
        let toy = Schedule::toy(2e-3);
        Self {
            schedule: ScheduleKind::Toy,
            k0: 3,
            epsilon: toy.epsilon,
            n_points: 600,
            extent: 3.1,
            levels: 12,
            dt_factor: 0.1,
            energy_samples: 200,
            period: toy.period,
            tau1: toy.tau1,
            tau2: toy.tau2,
            a1: toy.a1,
            a2: toy.a2,
            alpha_ramp: toy.alpha_ramp,
            barrier: BarrierChoice::Repulsive,
            identity_a: 2.0,
        }
    }
}

impl TdseSection {
    pub fn schedule(&self) -> Schedule {
        match self.schedule {
            ScheduleKind::Identity => Schedule {
                period: self.period,
                tau1: self.tau1,
                tau2: self.tau2,
                alpha_ramp: self.alpha_ramp,
                ..Schedule::identity(self.identity_a, self.epsilon)
            },
            ScheduleKind::Toy => Schedule {
                period: self.period,
                tau1: self.tau1,
                tau2: self.tau2,
                a1: self.a1,
                a2: self.a2,
                alpha_ramp: self.alpha_ramp,
                epsilon: self.epsilon,
                barrier: match self.barrier {
                    BarrierChoice::Repulsive => BarrierMode::Repulsive,
                    BarrierChoice::Attractive => BarrierMode::Attractive,
                    BarrierChoice::Off => BarrierMode::Off,
                },
            },
        }
    }

    pub fn grid(&self) -> Result<Grid, CliError> {
        Grid::new(self.n_points, self.extent)
            .map_err(|e| CliError::Config(format!("tdse grid: {e}")))
    }

    pub fn options(&self) -> ExperimentOptions {
        ExperimentOptions {
            levels: self.levels,
            dt_factor: self.dt_factor,
            energy_samples: self.energy_samples,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub directory: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
        }
    }
}

impl BernoulliSection {
    pub fn params(&self, seed: u64) -> Result<BernoulliParams, CliError> {
        BernoulliParams::new(self.beta, self.gamma, seed, self.stream_id)
            .map_err(|e| CliError::Config(format!("bernoulli: {e}")))
    }

    pub fn lln_options(&self) -> LlnOptions {
        LlnOptions {
            realization: match self.realization {
                RealizationChoice::Fresh => Realization::FreshEachPeriod,
                RealizationChoice::Fixed => Realization::FixedPair,
            },
            common_stream: self.common_stream,
        }
    }

    pub fn backend(&self) -> Backend {
        match self.backend {
            BackendChoice::Dense => Backend::Dense,
            BackendChoice::RandomAccess => Backend::RandomAccess,
        }
    }
}

impl ExperimentConfig {
    /// Parses TOML text. Relative paths stay relative; see [`Self::load`].
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Reads and parses a config file and resolves the user spectrum path
    /// against the file's directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut config = Self::from_toml(&text)?;
        if let Some(p) = &config.user_spectra.path {
            if p.is_relative() {
                let base = path.parent().unwrap_or(Path::new("."));
                config.user_spectra.path = Some(base.join(p));
            }
        }
        Ok(config)
    }

    /// Checks the selected model's section and the trajectory controls.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        let t = &self.trajectory;
        if t.k0.contains(&0) {
            return bad("trajectory.k0 entries must be at least 1".into());
        }
        if t.escape_threshold == 0 {
            return bad("trajectory.escape_threshold must be at least 1".into());
        }
        let dense_limit = |name: &str, levels: u64| {
            if levels == 0 || levels > MAX_DENSE_LEVELS {
                return bad(format!(
                    "{name}.levels must lie in 1..={MAX_DENSE_LEVELS}, got {levels}"
                ));
            }
            if !t.k0.is_empty() && t.escape_threshold > MAX_DENSE_LEVELS {
                return bad(format!(
                    "trajectory.escape_threshold must not exceed {MAX_DENSE_LEVELS} for the {name} model"
                ));
            }
            Ok(())
        };
        match self.model {
            Model::Segment => {
                let s = &self.segment;
                SegmentModelParams::new(s.a1, s.a2, s.levels as usize)
                    .map_err(|e| CliError::Config(format!("segment: {e}")))?;
                dense_limit("segment", s.levels)?;
            }
            Model::Spin => {
                let s = &self.spin;
                SpinModelParams::new(s.b1, s.b2, s.levels as usize)
                    .map_err(|e| CliError::Config(format!("spin: {e}")))?;
                dense_limit("spin", s.levels)?;
            }
            Model::Bernoulli => {
                let b = &self.bernoulli;
                b.params(self.seed)?;
                if b.levels == 0 || b.k_start == 0 || b.trials == 0 || b.lln_k0 == 0 {
                    return bad(
                        "bernoulli.levels, k_start, trials and lln_k0 must be at least 1".into(),
                    );
                }
                if b.common_stream && b.beta != b.gamma {
                    return bad("bernoulli.common_stream requires beta = gamma".into());
                }
            }
            Model::UserSpectra => {
                let Some(path) = &self.user_spectra.path else {
                    return bad("user_spectra.path is required for model user-spectra".into());
                };
                crate::load_user_spectra(path)?;
            }
            Model::Tdse => {
                let s = &self.tdse;
                let schedule = s.schedule();
                schedule
                    .validate()
                    .map_err(|e| CliError::Config(format!("tdse schedule: {e}")))?;
                let grid = s.grid()?;
                if schedule.max_a() > grid.x_max() {
                    return bad(format!(
                        "tdse.extent {} does not cover the wall at {}",
                        s.extent,
                        schedule.max_a()
                    ));
                }
                if s.levels == 0 || s.k0 == 0 || s.k0 > s.levels {
                    return bad(format!(
                        "tdse.k0 must lie in 1..=levels ({}), got {}",
                        s.levels, s.k0
                    ));
                }
                if s.levels * 4 > s.n_points {
                    return bad("tdse.levels must be well below n_points".into());
                }
                if s.dt_factor.is_nan() || s.dt_factor <= 0.0 || s.energy_samples == 0 {
                    return bad(
                        "tdse.dt_factor must be positive and energy_samples at least 1".into(),
                    );
                }
            }
        }
        Ok(())
    }
}
