//! Indicator sequences: the ±1 group labels of energy-ordered levels.
//!
//! At a moment where the eigenstates split into two families, level `k`
//! (counted from 1 in increasing energy) carries `σ(k) = +1` if it belongs to
//! group I and `σ(k) = −1` for group II. The prefix sums
//! `S(k) = σ(1) + … + σ(k)` encode how many members of each group lie at or
//! below level `k`, which is all the renumbering map needs.

use std::fmt;

use crate::levelmap::LevelMapError;

/// Group membership of a level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Group {
    /// `σ = +1`
    I,
    /// `σ = −1`
    II,
}

impl Group {
    pub fn from_sign(sign: i64) -> Option<Group> {
        match sign {
            1 => Some(Group::I),
            -1 => Some(Group::II),
            _ => None,
        }
    }

    #[inline]
    pub fn sign(self) -> i64 {
        match self {
            Group::I => 1,
            Group::II => -1,
        }
    }

    pub fn other(self) -> Group {
        match self {
            Group::I => Group::II,
            Group::II => Group::I,
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}", self.sign())
    }
}

/// Number of members of `group` among the first `k` levels, given `S(k)`.
#[inline]
pub(crate) fn group_count(group: Group, k: u64, prefix: i64) -> u64 {
    // (k + σ S) / 2 is exact: k and S(k) have equal parity.
    ((k as i128 + group.sign() as i128 * prefix as i128) / 2) as u64
}

/// Anything that can answer indicator queries for level numbers `k ≥ 1`.
///
/// Queries take `&mut self` so that lazily generated sequences can extend
/// themselves on demand.
pub trait IndicatorSource {
    /// `σ(k)`.
    fn group(&mut self, k: u64) -> Result<Group, LevelMapError>;

    /// `S(k)`, with `S(0) = 0`.
    fn prefix_sum(&mut self, k: u64) -> Result<i64, LevelMapError>;

    /// The unique level `k` with `σ(k) = group` that is the `index`-th member
    /// of its group.
    fn position_of(&mut self, group: Group, index: u64) -> Result<u64, LevelMapError>;
}

/// Generator used to extend a sequence past its stored range. Called with the
/// level number being produced, in increasing order without gaps.
pub type Provider = Box<dyn FnMut(u64) -> Group + Send>;

/// A stored indicator sequence with optional lazy extension.
pub struct IndicatorSequence {
    values: Vec<Group>,
    // prefix[k] = S(k); prefix[0] = 0.
    prefix: Vec<i64>,
    provider: Option<Provider>,
}

impl fmt::Debug for IndicatorSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IndicatorSequence")
            .field("len", &self.values.len())
            .field("lazy", &self.provider.is_some())
            .finish()
    }
}

impl Clone for IndicatorSequence {
    /// Clones the stored entries. The provider is not cloneable, so the
    /// clone is a finite sequence.
    fn clone(&self) -> Self {
        Self {
            values: self.values.clone(),
            prefix: self.prefix.clone(),
            provider: None,
        }
    }
}

impl IndicatorSequence {
    /// Finite sequence from stored values; `values[0]` is `σ(1)`.
    pub fn from_groups<I: IntoIterator<Item = Group>>(values: I) -> Self {
        let mut seq = Self {
            values: Vec::new(),
            prefix: vec![0],
            provider: None,
        };
        for g in values {
            seq.push(g);
        }
        seq
    }

    /// Finite sequence from ±1 integers.
    pub fn from_signs(signs: &[i64]) -> Result<Self, LevelMapError> {
        let groups = signs
            .iter()
            .enumerate()
            .map(|(i, &s)| {
                Group::from_sign(s).ok_or(LevelMapError::InvalidIndicator {
                    k: i as u64 + 1,
                    value: s,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::from_groups(groups))
    }

    /// Sequence with no stored entries, generated entirely on demand.
    pub fn lazy(provider: Provider) -> Self {
        Self::from_groups([]).with_provider(provider)
    }

    /// Attaches a provider for levels beyond the stored range.
    pub fn with_provider(mut self, provider: Provider) -> Self {
        self.provider = Some(provider);
        self
    }

    pub fn is_lazy(&self) -> bool {
        self.provider.is_some()
    }

    /// Number of stored levels.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Stored values, `σ(1)` first.
    pub fn values(&self) -> &[Group] {
        &self.values
    }

    /// Stored prefix sums, `S(0) = 0` first.
    pub fn prefix_sums(&self) -> &[i64] {
        &self.prefix
    }

    fn push(&mut self, g: Group) {
        let last = *self.prefix.last().expect("prefix starts with S(0)");
        self.values.push(g);
        self.prefix.push(last + g.sign());
    }

    /// Makes sure `σ(1..=k)` are stored, extending through the provider.
    pub fn ensure(&mut self, k: u64) -> Result<(), LevelMapError> {
        let have = self.values.len() as u64;
        if k <= have {
            return Ok(());
        }
        let Some(provider) = self.provider.as_mut() else {
            return Err(LevelMapError::Truncated {
                needed: k,
                available: have,
            });
        };
        let extra = usize::try_from(k - have).map_err(|_| LevelMapError::Overflow)?;
        self.values.reserve(extra);
        self.prefix.reserve(extra);
        for next in have + 1..=k {
            let g = provider(next);
            let last = *self.prefix.last().expect("prefix starts with S(0)");
            self.values.push(g);
            self.prefix.push(last + g.sign());
        }
        Ok(())
    }

    /// Recomputes every prefix sum by fresh summation and compares with the
    /// stored table.
    pub fn check_prefix_consistency(&self) -> bool {
        let mut s = 0i64;
        if self.prefix.first() != Some(&0) || self.prefix.len() != self.values.len() + 1 {
            return false;
        }
        for (k, g) in self.values.iter().enumerate() {
            s += g.sign();
            if self.prefix[k + 1] != s {
                return false;
            }
        }
        true
    }
}

impl IndicatorSource for IndicatorSequence {
    fn group(&mut self, k: u64) -> Result<Group, LevelMapError> {
        if k == 0 {
            return Err(LevelMapError::InvalidLevel(0));
        }
        self.ensure(k)?;
        Ok(self.values[(k - 1) as usize])
    }

    fn prefix_sum(&mut self, k: u64) -> Result<i64, LevelMapError> {
        self.ensure(k)?;
        Ok(self.prefix[k as usize])
    }

    fn position_of(&mut self, group: Group, index: u64) -> Result<u64, LevelMapError> {
        if index == 0 {
            return Err(LevelMapError::InvalidLevel(0));
        }
        let count_at = |prefix: &[i64], k: usize| group_count(group, k as u64, prefix[k]);
        let stored = self.values.len();
        if count_at(&self.prefix, stored) >= index {
            // Smallest k with count(k) >= index; the count is non-decreasing.
            let (mut lo, mut hi) = (1usize, stored);
            while lo < hi {
                let mid = lo + (hi - lo) / 2;
                if count_at(&self.prefix, mid) >= index {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            return Ok(lo as u64);
        }
        if self.provider.is_none() {
            return Err(LevelMapError::GroupExhausted {
                group,
                index,
                available: count_at(&self.prefix, stored),
                len: stored as u64,
            });
        }
        let mut k = stored as u64;
        loop {
            k = k.checked_add(1).ok_or(LevelMapError::Overflow)?;
            let g = self.group(k)?;
            if g == group && count_at(&self.prefix, k as usize) == index {
                return Ok(k);
            }
        }
    }
}
