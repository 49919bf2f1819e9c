use super::eigen::{instantaneous_spectrum, InstantaneousSpectrum};
use super::grid::Grid;
use super::propagate::{populations, Propagator, WaveState};
use super::schedule::{BarrierMode, Schedule};
use super::TdseError;
use crate::spectra::SegmentModelParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentOptions {
    /// Number of instantaneous levels tracked.
    pub levels: usize,
    /// Time step is `dt_factor / max |E_levels|`.
    pub dt_factor: f64,
    /// Number of energy expectation samples over the period.
    pub energy_samples: usize,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        Self {
            levels: 12,
            dt_factor: 0.1,
            energy_samples: 200,
        }
    }
}

/// Level populations at one slow time.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub label: &'static str,
    pub tau: f64,
    pub energies: Vec<f64>,
    pub populations: Vec<f64>,
}

impl Checkpoint {
    /// 1-based level with the largest population.
    pub fn dominant_level(&self) -> usize {
        self.populations
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map_or(0, |(i, _)| i + 1)
    }

    /// Population of 1-based level `k`, zero if not tracked.
    pub fn population(&self, k: usize) -> f64 {
        self.populations
            .get(k.wrapping_sub(1))
            .copied()
            .unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergySample {
    pub time: f64,
    pub tau: f64,
    pub energy: f64,
}

/// Outcome of propagating one full period from an eigenstate.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodReport {
    pub k0: usize,
    /// Level predicted by the combinatorial map.
    pub k_predicted: usize,
    /// Dominant level at the end of the period.
    pub k_observed: usize,
    pub checkpoints: Vec<Checkpoint>,
    pub energy_series: Vec<EnergySample>,
    pub dt: f64,
    pub steps: usize,
    pub norm_drift: f64,
}

impl PeriodReport {
    pub fn final_checkpoint(&self) -> &Checkpoint {
        self.checkpoints.last().expect("report has checkpoints")
    }

    /// `1 − Σ I_k` over the tracked levels at the end of the period.
    pub fn leakage(&self) -> f64 {
        1.0 - self.final_checkpoint().populations.iter().sum::<f64>()
    }
}

/// Slow times where populations are recorded: start, just before the barrier
/// rises, barrier fully up, barrier about to drop, barrier gone, and the end
/// of the period.
pub fn checkpoint_taus(schedule: &Schedule) -> Vec<(&'static str, f64)> {
    let s = schedule;
    vec![
        ("start", 0.0),
        ("tau1-", s.tau1 - s.alpha_ramp),
        ("tau1+", s.tau1),
        ("tau2-", s.tau2),
        ("tau2+", s.tau2 + s.alpha_ramp),
        ("end", s.period),
    ]
}

/// Level the combinatorial map predicts after one period.
pub fn predicted_level(schedule: &Schedule, k0: usize) -> Result<usize, TdseError> {
    if schedule.barrier == BarrierMode::Off || schedule.a1 == schedule.a2 {
        return Ok(k0);
    }
    let params = SegmentModelParams::new(schedule.a1, schedule.a2, k0.max(1))?;
    let mut map = params.level_map()?;
    let k = map.map_forward(k0 as u64)?;
    Ok(k as usize)
}

fn spectrum_at(
    grid: &Grid,
    schedule: &Schedule,
    tau: f64,
    levels: usize,
) -> Result<InstantaneousSpectrum, TdseError> {
    let h = super::build_hamiltonian_with(
        grid,
        schedule.a_of_tau(tau),
        schedule.alpha_of_tau(tau),
        schedule.barrier,
    )?;
    instantaneous_spectrum(&h, levels)
}

/// Largest `|E|` among the tracked levels over a sample of slow times.
pub fn max_tracked_energy(
    grid: &Grid,
    schedule: &Schedule,
    levels: usize,
) -> Result<f64, TdseError> {
    let mut worst: f64 = 0.0;
    let mut taus: Vec<f64> = (0..=20)
        .map(|i| schedule.period * i as f64 / 20.0)
        .collect();
    taus.extend(checkpoint_taus(schedule).into_iter().map(|(_, t)| t));
    for tau in taus {
        let spec = spectrum_at(grid, schedule, tau, levels)?;
        worst = spec.energies.iter().fold(worst, |m, e| m.max(e.abs()));
    }
    Ok(worst)
}

/// Start in level `k0` at `τ = 0`, propagate one period and record
/// populations at the checkpoints.
pub fn run_period_experiment(
    grid: &Grid,
    schedule: &Schedule,
    k0: usize,
    options: &ExperimentOptions,
) -> Result<PeriodReport, TdseError> {
    if k0 == 0 || k0 > options.levels {
        return Err(TdseError::Domain(format!(
            "initial level {k0} outside 1..={}",
            options.levels
        )));
    }
    if options.energy_samples == 0 || options.dt_factor.is_nan() || options.dt_factor <= 0.0 {
        return Err(TdseError::Domain(
            "need positive dt factor and at least one energy sample".into(),
        ));
    }
    let k_predicted = predicted_level(schedule, k0)?;
    let mut prop = Propagator::new(grid.clone(), *schedule)?;
    let dt = options.dt_factor / max_tracked_energy(grid, schedule, options.levels)?;

    let start = spectrum_at(grid, schedule, 0.0, options.levels)?;
    let mut state = WaveState::eigenstate(&start, k0, 0.0)?;
    let n0 = state.norm();

    // Merge checkpoint and energy-sample times into one ordered list of stops.
    let checkpoints = checkpoint_taus(schedule);
    let mut stops: Vec<(f64, Option<&'static str>)> =
        checkpoints.iter().map(|&(l, t)| (t, Some(l))).collect();
    stops.extend((1..options.energy_samples).map(|i| {
        (
            schedule.period * i as f64 / options.energy_samples as f64,
            None,
        )
    }));
    stops.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut recorded = Vec::with_capacity(checkpoints.len());
    let mut energy_series = Vec::with_capacity(options.energy_samples + 1);
    let mut steps = 0;
    for (tau, label) in stops {
        steps += prop.advance(&mut state, schedule.time_of(tau), dt)?;
        let h = prop.hamiltonian_at(state.time)?;
        energy_series.push(EnergySample {
            time: state.time,
            tau,
            energy: state.energy(&h),
        });
        if let Some(label) = label {
            let spec = spectrum_at(grid, schedule, tau, options.levels)?;
            recorded.push(Checkpoint {
                label,
                tau,
                populations: populations(&state, &spec)?,
                energies: spec.energies,
            });
        }
    }
    energy_series.dedup_by(|a, b| a.tau == b.tau);

    let end = recorded.last().expect("end checkpoint");
    Ok(PeriodReport {
        k0,
        k_predicted,
        k_observed: end.dominant_level(),
        norm_drift: (state.norm() - n0).abs(),
        checkpoints: recorded,
        energy_series,
        dt,
        steps,
    })
}
