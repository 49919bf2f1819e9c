//! Random indicator sequences and the per-period logarithmic growth rate.
//!
//! In the simplest random model `σ₁` and `σ₂` are independent i.i.d. sequences
//! with `P(σ₁(k) = +1) = β` and `P(σ₂(k) = +1) = γ`. A group I state then
//! moves from `k` to about `(β/γ) k`, a group II state to about
//! `((1−β)/(1−γ)) k`, and the mean of `ln k̄ − ln k` is the Kullback–Leibler
//! divergence between the two Bernoulli laws.

mod random_access;
mod rng;
mod scan;

use rand_distr::{Bernoulli, Distribution};
use rayon::prelude::*;
use thiserror::Error;

pub use random_access::{RandomAccessBernoulli, DEPTH as RANDOM_ACCESS_DEPTH};
pub use rng::Lane;
use scan::ScanningBernoulli;

use crate::indicator::{Group, IndicatorSequence, IndicatorSource};
use crate::levelmap::{
    growth_rate_of, return_events, AdiabaticLevelMap, Classification, LevelMapError,
    LevelTrajectory,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StochasticError {
    #[error("{name} must lie strictly between 0 and 1, got {value}")]
    Domain { name: &'static str, value: f64 },
    #[error("trial count must be at least 1")]
    NoTrials,
    #[error(
        "trial {trial}: image not resolved after {retries} extensions of the sequence ({source})"
    )]
    Unresolved {
        trial: u64,
        retries: u32,
        source: LevelMapError,
    },
    #[error(transparent)]
    LevelMap(#[from] LevelMapError),
}

fn check_probability(name: &'static str, value: f64) -> Result<(), StochasticError> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(StochasticError::Domain { name, value })
    }
}

/// Parameters of the independent Bernoulli model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BernoulliParams {
    /// `P(σ₁(k) = +1)`
    pub beta: f64,
    /// `P(σ₂(k) = +1)`
    pub gamma: f64,
    pub seed: u64,
    pub stream_id: u64,
}

impl BernoulliParams {
    pub fn new(beta: f64, gamma: f64, seed: u64, stream_id: u64) -> Result<Self, StochasticError> {
        let p = Self {
            beta,
            gamma,
            seed,
            stream_id,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), StochasticError> {
        check_probability("beta", self.beta)?;
        check_probability("gamma", self.gamma)
    }

    fn probability(&self, which: u8) -> f64 {
        if which == 1 {
            self.beta
        } else {
            self.gamma
        }
    }
}

/// `ρ = β ln(β/γ) + (1−β) ln((1−β)/(1−γ))`.
pub fn kl_rho(beta: f64, gamma: f64) -> Result<f64, StochasticError> {
    check_probability("beta", beta)?;
    check_probability("gamma", gamma)?;
    Ok(beta * (beta / gamma).ln() + (1.0 - beta) * ((1.0 - beta) / (1.0 - gamma)).ln())
}

/// Lazily generated i.i.d. sequence with `P(+1) = p`, drawn from `lane`.
///
/// `p` may be 0 or 1 here (constant sequences), which the public
/// parameter type rejects.
pub fn bernoulli_sequence(p: f64, seed: u64, stream_id: u64, lane: Lane) -> IndicatorSequence {
    let dist = Bernoulli::new(p).expect("probability in [0, 1]");
    let mut rng = rng::stream_rng(seed, stream_id, lane, 0);
    IndicatorSequence::lazy(Box::new(move |_| {
        if dist.sample(&mut rng) {
            Group::I
        } else {
            Group::II
        }
    }))
}

/// `σ₁` (`which = 1`, probability β) or `σ₂` (`which = 2`, probability γ).
pub fn bernoulli_indicators(params: &BernoulliParams, which: u8) -> IndicatorSequence {
    assert!(which == 1 || which == 2, "which must be 1 or 2");
    bernoulli_sequence(
        params.probability(which),
        params.seed,
        params.stream_id,
        Lane::sequence(which),
    )
}

/// How trial sequences are represented.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    /// Sequences drawn front to back, one value per level.
    #[default]
    Dense,
    /// Tree-sampled random-access sequences.
    RandomAccess,
}

/// Sample mean and standard error of `ln k̄ − ln k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: u64,
    /// `kl_rho(β, γ)`
    pub reference: f64,
    /// `2 / √k_start`, the allowance for the finite-`k` bias of the estimate.
    pub bias_allowance: f64,
}

impl GainEstimate {
    /// `|mean − reference| ≤ sigmas · std_error + bias_allowance`.
    pub fn consistent_with_reference(&self, sigmas: f64) -> bool {
        (self.mean - self.reference).abs() <= sigmas * self.std_error + self.bias_allowance
    }
}

/// Hard cap on a dense trial sequence, relative to the expected image.
const DENSE_INITIAL_FACTOR: u64 = 8;
const DENSE_RETRIES: u32 = 3;

/// Monte Carlo estimate of `E[ln k̄ − ln k]` from `k_start`, with fresh
/// independent `(σ₁, σ₂)` for each trial.
pub fn mc_gain(
    params: &BernoulliParams,
    k_start: u64,
    trials: u64,
) -> Result<GainEstimate, StochasticError> {
    mc_gain_with(params, k_start, trials, Backend::Dense)
}

pub fn mc_gain_with(
    params: &BernoulliParams,
    k_start: u64,
    trials: u64,
    backend: Backend,
) -> Result<GainEstimate, StochasticError> {
    params.validate()?;
    if trials == 0 {
        return Err(StochasticError::NoTrials);
    }
    if k_start == 0 {
        return Err(LevelMapError::InvalidLevel(0).into());
    }
    let gains = (0..trials)
        .into_par_iter()
        .map(|t| one_step_gain(params, k_start, t, backend))
        .collect::<Result<Vec<f64>, _>>()?;
    let n = gains.len() as f64;
    let mean = gains.iter().sum::<f64>() / n;
    let var = if gains.len() > 1 {
        gains.iter().map(|g| (g - mean) * (g - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Ok(GainEstimate {
        mean,
        std_error: (var / n).sqrt(),
        trials,
        reference: kl_rho(params.beta, params.gamma)?,
        bias_allowance: 2.0 / (k_start as f64).sqrt(),
    })
}

fn one_step_gain(
    params: &BernoulliParams,
    k: u64,
    trial: u64,
    backend: Backend,
) -> Result<f64, StochasticError> {
    let kbar = match backend {
        Backend::RandomAccess => {
            let mut map = AdiabaticLevelMap::new(
                RandomAccessBernoulli::new(
                    params.beta,
                    params.seed,
                    params.stream_id,
                    Lane::trial(trial, 1),
                ),
                RandomAccessBernoulli::new(
                    params.gamma,
                    params.seed,
                    params.stream_id,
                    Lane::trial(trial, 2),
                ),
            );
            map.map_forward(k)?
        }
        Backend::Dense => dense_step(params, k, trial)?,
    };
    Ok((kbar as f64).ln() - (k as f64).ln())
}

fn dense_step(params: &BernoulliParams, k: u64, trial: u64) -> Result<u64, StochasticError> {
    let ratio = (params.beta / params.gamma).max((1.0 - params.beta) / (1.0 - params.gamma));
    let mut limit = (k as f64 * ratio).ceil() as u64 * DENSE_INITIAL_FACTOR + 64;
    let sequence = |which: u8| {
        ScanningBernoulli::new(
            params.probability(which),
            params.seed,
            params.stream_id,
            Lane::trial(trial, which),
            limit,
        )
    };
    let mut map = AdiabaticLevelMap::new(sequence(1), sequence(2));
    let mut last_err = None;
    for _ in 0..=DENSE_RETRIES {
        // A retry continues the same realization past the old limit.
        map.sigma1.raise_limit(limit);
        map.sigma2.raise_limit(limit);
        match map.map_forward(k) {
            Ok(kbar) => return Ok(kbar),
            Err(e) if e.is_truncation() => {
                last_err = Some(e);
                limit = limit.saturating_mul(4);
            }
            Err(e) => return Err(e.into()),
        }
    }
    Err(StochasticError::Unresolved {
        trial,
        retries: DENSE_RETRIES,
        source: last_err.expect("at least one attempt"),
    })
}

/// Whether each period draws new sequences or reuses one pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Realization {
    /// New independent `(σ₁, σ₂)` every period.
    #[default]
    FreshEachPeriod,
    /// One `(σ₁, σ₂)` for the whole trajectory.
    FixedPair,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LlnOptions {
    pub realization: Realization,
    /// Draw `σ₂` from the same stream as `σ₁`. With `β = γ` this makes the
    /// two sequences identical.
    pub common_stream: bool,
}

/// A level trajectory of the random model with its `ln k_s` series.
#[derive(Debug, Clone, PartialEq)]
pub struct LlnTrajectory {
    pub trajectory: LevelTrajectory,
    pub ln_series: Vec<f64>,
    /// The trajectory left the addressable range and was cut short.
    pub overflowed: bool,
}

impl LlnTrajectory {
    /// Endpoint slope of `ln k_s`, or `None` for a single-point trajectory.
    pub fn slope(&self) -> Option<f64> {
        growth_rate_of(&self.trajectory.levels).ok()
    }

    /// Histogram of return lengths; see [`return_events`].
    pub fn return_histogram(&self) -> std::collections::BTreeMap<usize, usize> {
        return_events(&self.trajectory.levels)
    }
}

/// Iterates the random map for `periods` periods from `k0`.
pub fn lln_trajectory(
    params: &BernoulliParams,
    k0: u64,
    periods: usize,
    options: LlnOptions,
) -> Result<LlnTrajectory, StochasticError> {
    params.validate()?;
    if k0 == 0 {
        return Err(LevelMapError::InvalidLevel(0).into());
    }
    let sigma =
        |p: f64, lane: Lane| RandomAccessBernoulli::new(p, params.seed, params.stream_id, lane);
    let second = |which: u8| if options.common_stream { 1 } else { which };

    let trajectory = match options.realization {
        Realization::FixedPair => {
            let mut map = AdiabaticLevelMap::new(
                sigma(params.beta, Lane::sequence(1)),
                sigma(params.gamma, Lane::sequence(second(2))),
            );
            map.iterate(k0, periods, u64::MAX)
        }
        Realization::FreshEachPeriod => {
            let mut levels = vec![k0];
            let mut stopped_by = None;
            for s in 0..periods as u64 {
                let mut map = AdiabaticLevelMap::new(
                    sigma(params.beta, Lane::period(s, 1)),
                    sigma(params.gamma, Lane::period(s, second(2))),
                );
                match map.map_forward(*levels.last().expect("non-empty")) {
                    Ok(k) => levels.push(k),
                    Err(e) => {
                        stopped_by = Some(e);
                        break;
                    }
                }
            }
            LevelTrajectory {
                start: k0,
                levels,
                classification: Classification::Undetermined {
                    step_limit: periods,
                },
                stopped_by,
            }
        }
    };
    let overflowed = matches!(trajectory.stopped_by, Some(LevelMapError::Overflow));
    if let Some(e) = &trajectory.stopped_by {
        if !overflowed {
            return Err(e.clone().into());
        }
    }
    Ok(LlnTrajectory {
        ln_series: trajectory.log_series(),
        trajectory,
        overflowed,
    })
}

/// Endpoint slopes for a list of seeds, in seed order.
pub fn lln_slopes(
    params: &BernoulliParams,
    seeds: &[u64],
    k0: u64,
    periods: usize,
    options: LlnOptions,
) -> Result<Vec<(u64, LlnTrajectory)>, StochasticError> {
    seeds
        .par_iter()
        .map(|&seed| {
            let p = BernoulliParams { seed, ..*params };
            lln_trajectory(&p, k0, periods, options).map(|t| (seed, t))
        })
        .collect()
}

/// Fraction of `+1` entries among the first `n` levels of a sequence; a
/// convenience for checking `S(k)/k → 2p − 1`.
pub fn empirical_mean<S: IndicatorSource>(seq: &mut S, n: u64) -> Result<f64, LevelMapError> {
    Ok(seq.prefix_sum(n)? as f64 / n as f64)
}
