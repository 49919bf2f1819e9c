//! Spectra at the separation and reconnection moments, and the indicator
//! sequences they induce.
//!
//! Two closed-form models are provided:
//!
//! * the divided segment `[-1, a]` with `V = -1` on the left: left states
//!   `E_n = -1 + π² n²` (group I), right states `E_m = (π m / a)²` (group II);
//! * the spin-½ oscillator in a field `B`: up states `E_m = m - 1/2 - B`
//!   (group I), down states `E_n = n - 1/2 + B` (group II).
//!
//! Arbitrary spectra go through the same validation path via
//! [`SpectralSnapshot::new`].

use std::f64::consts::PI;

use thiserror::Error;

use crate::indicator::{Group, IndicatorSequence};
use crate::levelmap::AdiabaticLevelMap;

/// Cross-group energies closer than this are a tie.
pub const DEGENERACY_TOLERANCE: f64 = 1e-9;

/// Margin used when a closed-form floor lands next to an integer.
pub const FLOOR_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectrumError {
    #[error("degenerate spectrum: group I energy {group1} and group II energy {group2} differ by less than {DEGENERACY_TOLERANCE:e}")]
    Degenerate { group1: f64, group2: f64 },
    #[error(
        "group {group} energies not strictly increasing at entry {index}: {previous} then {value}"
    )]
    NotIncreasing {
        group: Group,
        index: usize,
        previous: f64,
        value: f64,
    },
    #[error("non-finite energy in group {group} at entry {index}")]
    NonFinite { group: Group, index: usize },
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),
    #[error("level {k} outside the resolved range of {available} levels")]
    OutOfRange { k: u64, available: u64 },
    #[error("closed-form floor too close to an integer to decide: {0}")]
    AmbiguousFloor(f64),
}

/// Group I and group II energies at one moment.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSnapshot {
    group1: Vec<f64>,
    group2: Vec<f64>,
    label: String,
    /// True when both lists are finite prefixes of infinite spectra, so only
    /// the merged levels below both list ends are known.
    truncated: bool,
    merged: Vec<(f64, Group)>,
}

impl SpectralSnapshot {
    /// Validates and merges two complete energy lists.
    pub fn new(
        label: impl Into<String>,
        group1: Vec<f64>,
        group2: Vec<f64>,
    ) -> Result<Self, SpectrumError> {
        Self::build(label.into(), group1, group2, false)
    }

    /// Like [`new`](Self::new), for finite prefixes of infinite spectra.
    pub fn truncated(
        label: impl Into<String>,
        group1: Vec<f64>,
        group2: Vec<f64>,
    ) -> Result<Self, SpectrumError> {
        Self::build(label.into(), group1, group2, true)
    }

    fn build(
        label: String,
        group1: Vec<f64>,
        group2: Vec<f64>,
        truncated: bool,
    ) -> Result<Self, SpectrumError> {
        check_increasing(Group::I, &group1)?;
        check_increasing(Group::II, &group2)?;
        let mut merged = merge_groups(&group1, &group2)?;
        if truncated {
            let known = match (group1.last(), group2.last()) {
                (Some(&a), Some(&b)) => a.min(b),
                _ => f64::NEG_INFINITY,
            };
            merged.retain(|&(e, _)| e < known);
        }
        Ok(Self {
            group1,
            group2,
            label,
            truncated,
            merged,
        })
    }

    pub fn group1(&self) -> &[f64] {
        &self.group1
    }

    pub fn group2(&self) -> &[f64] {
        &self.group2
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    /// Number of levels whose merged position is certain.
    pub fn level_count(&self) -> usize {
        self.merged.len()
    }

    /// Merged `(energy, group)` list in increasing energy.
    pub fn merged(&self) -> &[(f64, Group)] {
        &self.merged
    }

    /// Energy of merged level `k` (1-based).
    pub fn energy_of_level(&self, k: u64) -> Result<f64, SpectrumError> {
        if k == 0 || k > self.merged.len() as u64 {
            return Err(SpectrumError::OutOfRange {
                k,
                available: self.merged.len() as u64,
            });
        }
        Ok(self.merged[(k - 1) as usize].0)
    }

    /// `σ(k) = +1` iff the `k`-th smallest energy is from group I.
    pub fn indicators(&self) -> IndicatorSequence {
        IndicatorSequence::from_groups(self.merged.iter().map(|&(_, g)| g))
    }

    /// Least-squares slope of `ln E_k` against `ln k` over the positive
    /// energies, a diagnostic for `E_k ∼ k^ν`.
    pub fn fit_energy_exponent(&self) -> Option<f64> {
        let points: Vec<(f64, f64)> = self
            .merged
            .iter()
            .enumerate()
            .filter(|(_, (e, _))| *e > 0.0)
            .map(|(i, (e, _))| (((i + 1) as f64).ln(), e.ln()))
            .collect();
        if points.len() < 2 {
            return None;
        }
        let n = points.len() as f64;
        let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
        let my = points.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        (sxx > 0.0).then(|| sxy / sxx)
    }
}

/// Free function form of [`SpectralSnapshot::indicators`].
pub fn indicators_from_snapshot(snap: &SpectralSnapshot) -> IndicatorSequence {
    snap.indicators()
}

/// Free function form of [`SpectralSnapshot::energy_of_level`].
pub fn energy_of_level(k: u64, snap: &SpectralSnapshot) -> Result<f64, SpectrumError> {
    snap.energy_of_level(k)
}

/// Map built from the snapshots at separation and reconnection.
pub fn level_map(
    at_separation: &SpectralSnapshot,
    at_reconnection: &SpectralSnapshot,
) -> AdiabaticLevelMap {
    AdiabaticLevelMap::new(at_separation.indicators(), at_reconnection.indicators())
}

fn check_increasing(group: Group, energies: &[f64]) -> Result<(), SpectrumError> {
    for (i, e) in energies.iter().enumerate() {
        if !e.is_finite() {
            return Err(SpectrumError::NonFinite { group, index: i });
        }
    }
    for (i, w) in energies.windows(2).enumerate() {
        if w[1] <= w[0] {
            return Err(SpectrumError::NotIncreasing {
                group,
                index: i + 1,
                previous: w[0],
                value: w[1],
            });
        }
    }
    Ok(())
}

fn merge_groups(group1: &[f64], group2: &[f64]) -> Result<Vec<(f64, Group)>, SpectrumError> {
    let mut merged = Vec::with_capacity(group1.len() + group2.len());
    let (mut i, mut j) = (0, 0);
    while i < group1.len() && j < group2.len() {
        let (a, b) = (group1[i], group2[j]);
        if (a - b).abs() < DEGENERACY_TOLERANCE {
            return Err(SpectrumError::Degenerate {
                group1: a,
                group2: b,
            });
        }
        if a < b {
            merged.push((a, Group::I));
            i += 1;
        } else {
            merged.push((b, Group::II));
            j += 1;
        }
    }
    merged.extend(group1[i..].iter().map(|&e| (e, Group::I)));
    merged.extend(group2[j..].iter().map(|&e| (e, Group::II)));
    Ok(merged)
}

/// Generates both groups from closed forms until at least `count` merged
/// levels are certain: each list runs past the `count`-th merged energy plus
/// one extra entry.
fn snapshot_from_closed_forms(
    label: String,
    count: usize,
    group1: impl Fn(u64) -> f64,
    group2: impl Fn(u64) -> f64,
) -> Result<SpectralSnapshot, SpectrumError> {
    if count == 0 {
        return Err(SpectrumError::InvalidParams(
            "level count must be at least 1".into(),
        ));
    }
    // Two-pointer walk over the (increasing) closed forms to find E_count.
    let (mut n, mut m) = (1u64, 1u64);
    let mut kth = f64::NEG_INFINITY;
    for _ in 0..count {
        let (a, b) = (group1(n), group2(m));
        if a < b {
            kth = a;
            n += 1;
        } else {
            kth = b;
            m += 1;
        }
    }
    let fill = |f: &dyn Fn(u64) -> f64| {
        let mut out = Vec::new();
        let mut i = 1u64;
        loop {
            let e = f(i);
            out.push(e);
            i += 1;
            if e > kth {
                out.push(f(i));
                return out;
            }
        }
    };
    let g1 = fill(&group1);
    let g2 = fill(&group2);
    let snap = SpectralSnapshot::truncated(label, g1, g2)?;
    debug_assert!(snap.level_count() >= count);
    Ok(snap)
}

/// Parameters of the divided segment: right-well length at separation and at
/// reconnection, and the number of levels to resolve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentModelParams {
    pub a1: f64,
    pub a2: f64,
    pub level_count: usize,
}

impl SegmentModelParams {
    pub fn new(a1: f64, a2: f64, level_count: usize) -> Result<Self, SpectrumError> {
        let p = Self {
            a1,
            a2,
            level_count,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), SpectrumError> {
        if !(self.a1.is_finite() && self.a1 > 0.0 && self.a2.is_finite() && self.a2 > 0.0) {
            return Err(SpectrumError::InvalidParams(format!(
                "segment lengths must be positive, got a1={} a2={}",
                self.a1, self.a2
            )));
        }
        if self.a1 == self.a2 {
            return Err(SpectrumError::InvalidParams(format!(
                "a1 and a2 must differ, both are {}",
                self.a1
            )));
        }
        if self.level_count == 0 {
            return Err(SpectrumError::InvalidParams(
                "level count must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Snapshots at separation and reconnection. The reconnection snapshot
    /// resolves enough levels for every image of the first `level_count`
    /// levels.
    pub fn snapshots(&self) -> Result<(SpectralSnapshot, SpectralSnapshot), SpectrumError> {
        let s1 = segment_snapshot(self.a1, self.level_count)?;
        let s2 = segment_snapshot(self.a2, image_budget(&s1, self.a2))?;
        Ok((s1, s2))
    }

    pub fn level_map(&self) -> Result<AdiabaticLevelMap, SpectrumError> {
        let (s1, s2) = self.snapshots()?;
        Ok(level_map(&s1, &s2))
    }
}

/// Number of levels at reconnection that covers the images of the group
/// members present at separation.
fn image_budget(s1: &SpectralSnapshot, a2: f64) -> usize {
    let left = s1.merged.iter().filter(|(_, g)| *g == Group::I).count();
    let right = s1.merged.len() - left;
    // Left n sits at n + ⌊a √(n² − 1/π²)⌋ ≤ n(1 + a); right m at m + ⌊√((m/a)² + 1/π²)⌋.
    let by_left = (left as f64 * (1.0 + a2)).ceil() as usize;
    let by_right = (right as f64 * (1.0 + 1.0 / a2)).ceil() as usize + 1;
    by_left.max(by_right).max(s1.merged.len()) + 2
}

/// Left (group I) energy `−1 + π² n²`.
pub fn segment_left_energy(n: u64) -> f64 {
    let n = n as f64;
    -1.0 + PI * PI * n * n
}

/// Right (group II) energy `(π m / a)²`.
pub fn segment_right_energy(m: u64, a: f64) -> f64 {
    let q = PI * m as f64 / a;
    q * q
}

/// Divided-segment spectrum with right-well length `a`, resolving at least
/// `count` merged levels.
pub fn segment_snapshot(a: f64, count: usize) -> Result<SpectralSnapshot, SpectrumError> {
    if !(a.is_finite() && a > 0.0) {
        return Err(SpectrumError::InvalidParams(format!(
            "segment length must be positive, got {a}"
        )));
    }
    snapshot_from_closed_forms(format!("segment a={a}"), count, segment_left_energy, |m| {
        segment_right_energy(m, a)
    })
}

/// Merged position of left state `n` when the right well has length `a`:
/// `n + ⌊a √(n² − 1/π²)⌋`.
pub fn segment_left_position(n: u64, a: f64) -> Result<u64, SpectrumError> {
    // j ≤ a √(n² − 1/π²)  ⟺  j² π² ≤ a² (n² π² − 1)
    let nf = n as f64;
    let rhs = a * a * (nf * nf * PI * PI - 1.0);
    let j = checked_floor(a * (nf * nf - 1.0 / (PI * PI)).sqrt(), |j| {
        j * j * PI * PI - rhs
    })?;
    Ok(n + j)
}

/// Merged position of right state `m`: `m + ⌊√((m/a)² + 1/π²)⌋`.
pub fn segment_right_position(m: u64, a: f64) -> Result<u64, SpectrumError> {
    // j ≤ √((m/a)² + 1/π²)  ⟺  j² a² π² ≤ m² π² + a²
    let mf = m as f64;
    let rhs = mf * mf * PI * PI + a * a;
    let j = checked_floor(((mf / a).powi(2) + 1.0 / (PI * PI)).sqrt(), |j| {
        j * j * a * a * PI * PI - rhs
    })?;
    Ok(m + j)
}

/// Floor of a non-negative `x`, confirmed with the squared comparison
/// `excess(j) = lhs(j) − rhs` (non-positive iff `j ≤ x`).
fn checked_floor(x: f64, excess: impl Fn(f64) -> f64) -> Result<u64, SpectrumError> {
    let mut j = x.floor().max(0.0);
    // Floating floor may be off by one right at an integer; settle it on the
    // squared form.
    if excess(j) > 0.0 {
        j -= 1.0;
    } else if excess(j + 1.0) <= 0.0 {
        j += 1.0;
    }
    if (x - x.round()).abs() < FLOOR_MARGIN * x.max(1.0) {
        return Err(SpectrumError::AmbiguousFloor(x));
    }
    Ok(j as u64)
}

/// Field values at separation and reconnection for the spin-½ oscillator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinModelParams {
    pub b1: f64,
    pub b2: f64,
    pub level_count: usize,
}

impl SpinModelParams {
    pub fn new(b1: f64, b2: f64, level_count: usize) -> Result<Self, SpectrumError> {
        let p = Self {
            b1,
            b2,
            level_count,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), SpectrumError> {
        for b in [self.b1, self.b2] {
            check_spin_field(b)?;
        }
        if self.level_count == 0 {
            return Err(SpectrumError::InvalidParams(
                "level count must be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn snapshots(&self) -> Result<(SpectralSnapshot, SpectralSnapshot), SpectrumError> {
        let s1 = spin_snapshot(self.b1, self.level_count)?;
        // Up and down ladders both have unit spacing, so the image of level k
        // moves by at most ⌈2|b2 − b1|⌉ + 1 positions.
        let shift = (2.0 * (self.b2 - self.b1).abs()).ceil() as usize + 2;
        let s2 = spin_snapshot(self.b2, self.level_count + 2 * shift)?;
        Ok((s1, s2))
    }

    pub fn level_map(&self) -> Result<AdiabaticLevelMap, SpectrumError> {
        let (s1, s2) = self.snapshots()?;
        Ok(level_map(&s1, &s2))
    }
}

fn check_spin_field(b: f64) -> Result<(), SpectrumError> {
    if !b.is_finite() {
        return Err(SpectrumError::InvalidParams(format!(
            "field must be finite, got {b}"
        )));
    }
    // E_m⁺ = E_n⁻  ⟺  m − n = 2B
    let twice = 2.0 * b;
    if (twice - twice.round()).abs() < DEGENERACY_TOLERANCE {
        let energy = if twice >= 0.0 { 0.5 + b } else { 0.5 - b };
        return Err(SpectrumError::Degenerate {
            group1: energy,
            group2: energy,
        });
    }
    Ok(())
}

/// Spin-up (group I) energy `m − 1/2 − B`.
pub fn spin_up_energy(m: u64, b: f64) -> f64 {
    m as f64 - 0.5 - b
}

/// Spin-down (group II) energy `n − 1/2 + B`.
pub fn spin_down_energy(n: u64, b: f64) -> f64 {
    n as f64 - 0.5 + b
}

/// Spin-oscillator spectrum in field `b`, resolving at least `count` levels.
pub fn spin_snapshot(b: f64, count: usize) -> Result<SpectralSnapshot, SpectrumError> {
    check_spin_field(b)?;
    snapshot_from_closed_forms(
        format!("spin B={b}"),
        count,
        |m| spin_up_energy(m, b),
        |n| spin_down_energy(n, b),
    )
}
