//! Level renumbering across one period of separation and reconnection.
//!
//! After separation at `τ₁` the level `k` becomes the `n`-th member of group
//! `σ₁(k)`, where `n = (k + σ₁(k) S₁(k)) / 2`. Each group evolves without
//! internal crossings, so at reconnection `τ₂` the state is the `n`-th member
//! of the same group, which sits at the level `k̄` with
//!
//! ```text
//!     k̄ + σ₂(k̄) S₂(k̄) = k + σ₁(k) S₁(k),   σ₂(k̄) = σ₁(k).
//! ```
//!
//! Iterating `k ↦ k̄` gives the level number at the start of each period.

use std::collections::HashMap;

use thiserror::Error;

use crate::indicator::{group_count, Group, IndicatorSequence, IndicatorSource};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LevelMapError {
    #[error("indicator sequence truncated: level {needed} requested, {available} available and no provider")]
    Truncated { needed: u64, available: u64 },
    #[error("group {group} has only {available} members among {len} stored levels; member {index} requested")]
    GroupExhausted {
        group: Group,
        index: u64,
        available: u64,
        len: u64,
    },
    #[error("level number overflow")]
    Overflow,
    #[error("level numbers start at 1, got {0}")]
    InvalidLevel(u64),
    #[error("indicator at level {k} must be +1 or -1, got {value}")]
    InvalidIndicator { k: u64, value: i64 },
    #[error("trajectory needs at least two recorded levels")]
    DegenerateTrajectory,
}

impl LevelMapError {
    /// True for errors caused by running off the end of a finite sequence.
    pub fn is_truncation(&self) -> bool {
        matches!(
            self,
            LevelMapError::Truncated { .. } | LevelMapError::GroupExhausted { .. }
        )
    }
}

/// Group and within-group index of level `k`.
pub fn group_index<S: IndicatorSource + ?Sized>(
    k: u64,
    sigma: &mut S,
) -> Result<(Group, u64), LevelMapError> {
    if k == 0 {
        return Err(LevelMapError::InvalidLevel(0));
    }
    let group = sigma.group(k)?;
    let prefix = sigma.prefix_sum(k)?;
    Ok((group, group_count(group, k, prefix)))
}

/// Level number of the `index`-th member of `group`.
pub fn position_of<S: IndicatorSource + ?Sized>(
    group: Group,
    index: u64,
    sigma: &mut S,
) -> Result<u64, LevelMapError> {
    sigma.position_of(group, index)
}

/// The pair of indicator sequences at separation (`sigma1`) and
/// reconnection (`sigma2`).
#[derive(Debug, Clone)]
pub struct AdiabaticLevelMap<S = IndicatorSequence> {
    pub sigma1: S,
    pub sigma2: S,
}

impl<S: IndicatorSource> AdiabaticLevelMap<S> {
    pub fn new(sigma1: S, sigma2: S) -> Self {
        Self { sigma1, sigma2 }
    }

    /// Level at the next period start for a state at level `k` now.
    pub fn map_forward(&mut self, k: u64) -> Result<u64, LevelMapError> {
        let (group, index) = group_index(k, &mut self.sigma1)?;
        self.sigma2.position_of(group, index)
    }

    /// Inverse of [`map_forward`](Self::map_forward).
    pub fn map_backward(&mut self, kbar: u64) -> Result<u64, LevelMapError> {
        let (group, index) = group_index(kbar, &mut self.sigma2)?;
        self.sigma1.position_of(group, index)
    }

    /// Iterates the forward map from `k0`.
    ///
    /// Stops at the first recurrence (loop), once a level exceeds
    /// `escape_threshold`, after `step_limit` steps, or when a sequence runs
    /// out. The last case is reported as undetermined with the error attached.
    pub fn iterate(
        &mut self,
        k0: u64,
        step_limit: usize,
        escape_threshold: u64,
    ) -> LevelTrajectory {
        self.walk(k0, step_limit, escape_threshold, Self::map_forward)
    }

    /// Same as [`iterate`](Self::iterate) but with the inverse map. Used as a
    /// diagnostic of backward behavior.
    pub fn iterate_backward(
        &mut self,
        k0: u64,
        step_limit: usize,
        escape_threshold: u64,
    ) -> LevelTrajectory {
        self.walk(k0, step_limit, escape_threshold, Self::map_backward)
    }

    fn walk(
        &mut self,
        k0: u64,
        step_limit: usize,
        escape_threshold: u64,
        step: fn(&mut Self, u64) -> Result<u64, LevelMapError>,
    ) -> LevelTrajectory {
        let mut levels = vec![k0];
        let mut seen = HashMap::from([(k0, 0usize)]);
        let mut stopped_by = None;
        let mut classification = Classification::Undetermined { step_limit };
        if k0 == 0 {
            stopped_by = Some(LevelMapError::InvalidLevel(0));
        } else {
            for s in 1..=step_limit {
                let current = *levels.last().expect("non-empty");
                let next = match step(self, current) {
                    Ok(next) => next,
                    Err(e) => {
                        stopped_by = Some(e);
                        break;
                    }
                };
                levels.push(next);
                if let Some(&first) = seen.get(&next) {
                    classification = Classification::Loop { period: s - first };
                    break;
                }
                if next > escape_threshold {
                    classification = Classification::Escaped {
                        threshold: escape_threshold,
                    };
                    break;
                }
                seen.insert(next, s);
            }
        }
        LevelTrajectory {
            start: k0,
            levels,
            classification,
            stopped_by,
        }
    }
}

/// How a trajectory ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    /// The last recorded level equals the one `period` steps earlier.
    Loop { period: usize },
    /// The last recorded level exceeds `threshold`.
    Escaped { threshold: u64 },
    /// Neither within `step_limit` steps (or the sequences ran out).
    Undetermined { step_limit: usize },
}

/// Level numbers at successive period starts; `levels[0]` is the start.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelTrajectory {
    pub start: u64,
    pub levels: Vec<u64>,
    pub classification: Classification,
    /// Set when iteration stopped because of a map error.
    pub stopped_by: Option<LevelMapError>,
}

impl LevelTrajectory {
    /// Number of recorded map applications.
    pub fn steps(&self) -> usize {
        self.levels.len().saturating_sub(1)
    }

    pub fn last(&self) -> u64 {
        *self
            .levels
            .last()
            .expect("trajectory always holds its start")
    }

    /// `ln k_s` for every recorded level.
    pub fn log_series(&self) -> Vec<f64> {
        self.levels.iter().map(|&k| entropy(k)).collect()
    }
}

/// Endpoint slope `(ln k_S − ln k_0) / S`.
pub fn growth_rate(traj: &LevelTrajectory) -> Result<f64, LevelMapError> {
    growth_rate_of(&traj.levels)
}

pub(crate) fn growth_rate_of(levels: &[u64]) -> Result<f64, LevelMapError> {
    if levels.len() < 2 {
        return Err(LevelMapError::DegenerateTrajectory);
    }
    if let Some(&bad) = levels.iter().find(|&&k| k == 0) {
        return Err(LevelMapError::InvalidLevel(bad));
    }
    let s = (levels.len() - 1) as f64;
    let first = levels[0] as f64;
    let last = levels[levels.len() - 1] as f64;
    Ok((last.ln() - first.ln()) / s)
}

/// `ln k`, the entropy of the `k`-th energy eigenstate.
pub fn entropy(k: u64) -> f64 {
    (k as f64).ln()
}

/// For each recorded step `s`, the smallest `p ≥ 1` with `k_s = k_{s−p}`.
/// Returns a histogram from return length to number of events.
pub fn return_events(levels: &[u64]) -> std::collections::BTreeMap<usize, usize> {
    let mut last_seen: HashMap<u64, usize> = HashMap::new();
    let mut hist = std::collections::BTreeMap::new();
    for (s, &k) in levels.iter().enumerate() {
        if let Some(prev) = last_seen.insert(k, s) {
            *hist.entry(s - prev).or_insert(0) += 1;
        }
    }
    hist
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Divided segment at a=1 (alternating, left first) and a=3
    /// (R,R,L,R,R,R,L,... with left states at 4n-1).
    fn toy_map(len: usize) -> AdiabaticLevelMap {
        let s1 = IndicatorSequence::from_groups((1..=len).map(|k| {
            if k % 2 == 1 {
                Group::I
            } else {
                Group::II
            }
        }));
        let s2 = IndicatorSequence::from_groups((1..=2 * len + 2).map(|k| {
            if k % 4 == 3 {
                Group::I
            } else {
                Group::II
            }
        }));
        AdiabaticLevelMap::new(s1, s2)
    }

    fn spin_map(len: usize) -> AdiabaticLevelMap {
        let s1 = IndicatorSequence::from_groups((1..=len).map(|k| {
            if k % 2 == 0 {
                Group::I
            } else {
                Group::II
            }
        }));
        let s2 = IndicatorSequence::from_groups((1..=len + 4).map(|k| {
            if k == 1 || k % 2 == 0 {
                Group::I
            } else {
                Group::II
            }
        }));
        AdiabaticLevelMap::new(s1, s2)
    }

    #[test]
    fn group_index_examples() {
        let mut m = toy_map(20);
        assert_eq!(group_index(3, &mut m.sigma1).unwrap(), (Group::I, 2));
        assert_eq!(group_index(1, &mut m.sigma1).unwrap(), (Group::I, 1));
        assert_eq!(group_index(6, &mut m.sigma1).unwrap(), (Group::II, 3));
        assert!(matches!(
            group_index(0, &mut m.sigma1),
            Err(LevelMapError::InvalidLevel(0))
        ));
    }

    #[test]
    fn position_of_examples() {
        let mut m = toy_map(20);
        assert_eq!(position_of(Group::I, 1, &mut m.sigma2).unwrap(), 3);
        assert_eq!(position_of(Group::II, 3, &mut m.sigma2).unwrap(), 4);
        let mut ones = IndicatorSequence::from_groups([Group::I; 5]);
        assert_eq!(position_of(Group::I, 1, &mut ones).unwrap(), 1);
    }

    #[test]
    fn forward_and_backward_examples() {
        let mut toy = toy_map(40);
        assert_eq!(toy.map_forward(3).unwrap(), 7);
        assert_eq!(toy.map_forward(6).unwrap(), 4);
        assert_eq!(toy.map_backward(7).unwrap(), 3);

        let mut spin = spin_map(40);
        assert_eq!(spin.map_forward(2).unwrap(), 1);
        assert_eq!(spin.map_forward(5).unwrap(), 7);
        assert_eq!(spin.map_backward(1).unwrap(), 2);
        for k in 1..=30 {
            let kbar = spin.map_forward(k).unwrap();
            assert_eq!(spin.map_backward(kbar).unwrap(), k);
        }
    }

    #[test]
    fn iterate_examples() {
        let mut toy = toy_map(100);
        let t = toy.iterate(2, 50, 30);
        assert_eq!(t.levels, vec![2, 1, 3, 7, 15, 31]);
        assert_eq!(t.classification, Classification::Escaped { threshold: 30 });

        let mut spin = spin_map(100);
        let t = spin.iterate(6, 50, 8);
        assert_eq!(t.levels, vec![6, 4, 2, 1, 3, 5, 7, 9]);
        assert!(matches!(t.classification, Classification::Escaped { .. }));

        let seq = IndicatorSequence::from_signs(&[1, -1, -1, 1, -1, 1]).unwrap();
        let mut id = AdiabaticLevelMap::new(seq.clone(), seq);
        let t = id.iterate(5, 10, 100);
        assert_eq!(t.levels, vec![5, 5]);
        assert_eq!(t.classification, Classification::Loop { period: 1 });
        assert_eq!(growth_rate(&t).unwrap(), 0.0);
    }

    #[test]
    fn truncation_is_reported_as_undetermined() {
        let mut toy = toy_map(10);
        let t = toy.iterate(3, 50, u64::MAX);
        assert_eq!(t.levels, vec![3, 7, 15]);
        assert!(matches!(
            t.classification,
            Classification::Undetermined { step_limit: 50 }
        ));
        assert!(t.stopped_by.as_ref().is_some_and(|e| e.is_truncation()));
    }

    #[test]
    fn loop_entered_after_transient_is_found() {
        // Not a bijection, so a transient is possible: 1 -> 2 -> 3 -> 2.
        struct Table;
        impl IndicatorSource for Table {
            fn group(&mut self, _: u64) -> Result<Group, LevelMapError> {
                Ok(Group::I)
            }
            fn prefix_sum(&mut self, k: u64) -> Result<i64, LevelMapError> {
                Ok(k as i64)
            }
            fn position_of(&mut self, _: Group, index: u64) -> Result<u64, LevelMapError> {
                Ok(match index {
                    1 => 2,
                    2 => 3,
                    _ => 2,
                })
            }
        }
        let mut m = AdiabaticLevelMap::new(Table, Table);
        let t = m.iterate(1, 10, 100);
        assert_eq!(t.levels, vec![1, 2, 3, 2]);
        assert_eq!(t.classification, Classification::Loop { period: 2 });
    }

    #[test]
    fn growth_rate_examples() {
        let odd = LevelTrajectory {
            start: 3,
            levels: vec![3, 7, 15, 31, 63],
            classification: Classification::Undetermined { step_limit: 4 },
            stopped_by: None,
        };
        let rate = growth_rate(&odd).unwrap();
        assert!((rate - 2f64.ln()).abs() <= (1.0 + 1.0 / 3.0f64).ln() / 4.0 + 1e-12);

        let s = 50u64;
        let down: Vec<u64> = (0..=s).map(|i| 2 * i + 1).collect();
        let rate = growth_rate_of(&down).unwrap();
        assert!((rate - ((2 * s + 1) as f64).ln() / s as f64).abs() < 1e-12);

        assert_eq!(
            growth_rate_of(&[5]),
            Err(LevelMapError::DegenerateTrajectory)
        );
    }

    #[test]
    fn entropy_values() {
        assert_eq!(entropy(1), 0.0);
        assert!((entropy(3) - 1.0986122886681098).abs() < 1e-15);
        // Linear in the period count along the doubling branch k -> 2k+1.
        let ks: Vec<u64> = (0..20).map(|s| (1u64 << (s + 2)) - 1).collect();
        let diffs: Vec<f64> = ks
            .windows(2)
            .map(|w| entropy(w[1]) - entropy(w[0]))
            .collect();
        assert!(diffs.iter().skip(5).all(|d| (d - 2f64.ln()).abs() < 1e-2));
    }

    #[test]
    fn return_event_histogram() {
        let h = return_events(&[1, 2, 1, 3, 2, 2]);
        assert_eq!(h.get(&2), Some(&1));
        assert_eq!(h.get(&3), Some(&1));
        assert_eq!(h.get(&1), Some(&1));
    }
}
