//! Bernoulli sequences with random access to prefix sums at any level.
//!
//! The sequence on positions `1..=2^DEPTH` is a binary tree of counts: the
//! root holds the number of `+1` entries in the whole range, and each node's
//! count is split between its halves by a hypergeometric draw. Every node
//! draws from its own ChaCha stream, so any query is a root-to-leaf walk and
//! repeated or reordered queries see the same realization. This reaches level
//! numbers far beyond anything that could be stored densely.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Hypergeometric, StandardNormal};

use super::rng::{stream_rng, Lane};
use crate::indicator::{Group, IndicatorSource};
use crate::levelmap::LevelMapError;

/// The tree covers levels `1..=2^DEPTH`.
pub const DEPTH: u32 = 61;

/// Largest population sampled with the exact binomial/hypergeometric
/// samplers. Above this, a moment-matched normal draw is used; the f64
/// log-factorials inside the exact samplers lose precision at large sizes.
pub const EXACT_POPULATION_LIMIT: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq)]
pub struct RandomAccessBernoulli {
    p: f64,
    seed: u64,
    stream_id: u64,
    lane: Lane,
}

impl RandomAccessBernoulli {
    /// `p` is the probability of `+1` (group I) and must lie in `[0, 1]`.
    pub fn new(p: f64, seed: u64, stream_id: u64, lane: Lane) -> Self {
        assert!((0.0..=1.0).contains(&p), "probability out of range: {p}");
        Self {
            p,
            seed,
            stream_id,
            lane,
        }
    }

    pub fn probability(&self) -> f64 {
        self.p
    }

    /// Largest addressable level.
    pub fn capacity(&self) -> u64 {
        1 << DEPTH
    }

    fn node_rng(&self, node: u64) -> ChaCha8Rng {
        stream_rng(self.seed, self.stream_id, self.lane, node)
    }

    fn root_count(&self) -> u64 {
        binomial(&mut self.node_rng(1), 1 << DEPTH, self.p)
    }

    fn left_count(&self, node: u64, size: u64, count: u64) -> u64 {
        hypergeometric_split(&mut self.node_rng(node), size, count, size / 2)
    }

    /// Number of `+1` entries among levels `1..=k`.
    pub fn count_upto(&self, k: u64) -> Result<u64, LevelMapError> {
        if k > self.capacity() {
            return Err(LevelMapError::Overflow);
        }
        let (mut node, mut lo, mut size, mut count) =
            (1u64, 0u64, 1u64 << DEPTH, self.root_count());
        let mut acc = 0u64;
        // Positions lo..lo+size (0-based) belong to `node`; we need the count
        // of the first k positions.
        loop {
            if k == lo {
                return Ok(acc);
            }
            if k == lo + size {
                return Ok(acc + count);
            }
            let half = size / 2;
            let left = self.left_count(node, size, count);
            if k <= lo + half {
                node *= 2;
                count = left;
            } else {
                acc += left;
                node = 2 * node + 1;
                lo += half;
                count -= left;
            }
            size = half;
        }
    }
}

impl IndicatorSource for RandomAccessBernoulli {
    fn group(&mut self, k: u64) -> Result<Group, LevelMapError> {
        if k == 0 {
            return Err(LevelMapError::InvalidLevel(0));
        }
        let c = self.count_upto(k)? - self.count_upto(k - 1)?;
        Ok(if c == 1 { Group::I } else { Group::II })
    }

    fn prefix_sum(&mut self, k: u64) -> Result<i64, LevelMapError> {
        let plus = self.count_upto(k)?;
        Ok(2 * plus as i64 - k as i64)
    }

    fn position_of(&mut self, group: Group, index: u64) -> Result<u64, LevelMapError> {
        if index == 0 {
            return Err(LevelMapError::InvalidLevel(0));
        }
        let (mut node, mut lo, mut size, mut count) =
            (1u64, 0u64, 1u64 << DEPTH, self.root_count());
        let members = |size: u64, plus: u64| match group {
            Group::I => plus,
            Group::II => size - plus,
        };
        if members(size, count) < index {
            return Err(LevelMapError::Overflow);
        }
        let mut index = index;
        while size > 1 {
            let half = size / 2;
            let left = self.left_count(node, size, count);
            let in_left = members(half, left);
            if index <= in_left {
                node *= 2;
                count = left;
            } else {
                index -= in_left;
                node = 2 * node + 1;
                lo += half;
                count -= left;
            }
            size = half;
        }
        Ok(lo + 1)
    }
}

fn normal_draw<R: Rng + ?Sized>(rng: &mut R, mean: f64, var: f64, lo: u64, hi: u64) -> u64 {
    let z: f64 = StandardNormal.sample(rng);
    let x = (mean + var.sqrt() * z).round();
    (x.max(lo as f64).min(hi as f64)) as u64
}

pub(crate) fn binomial<R: Rng + ?Sized>(rng: &mut R, n: u64, p: f64) -> u64 {
    if n <= EXACT_POPULATION_LIMIT {
        return Binomial::new(n, p).expect("valid binomial").sample(rng);
    }
    let nf = n as f64;
    normal_draw(rng, nf * p, nf * p * (1.0 - p), 0, n)
}

/// Number of marked items that land in a sample of `draws` from `total`
/// items of which `marked` are marked.
pub(crate) fn hypergeometric_split<R: Rng + ?Sized>(
    rng: &mut R,
    total: u64,
    marked: u64,
    draws: u64,
) -> u64 {
    let lo = marked.saturating_sub(total - draws);
    let hi = marked.min(draws);
    if lo == hi {
        return lo;
    }
    if total <= EXACT_POPULATION_LIMIT {
        return Hypergeometric::new(total, marked, draws)
            .expect("valid hypergeometric")
            .sample(rng);
    }
    let (n, k, d) = (total as f64, marked as f64, draws as f64);
    let frac = k / n;
    let var = d * frac * (1.0 - frac) * (n - d) / (n - 1.0);
    normal_draw(rng, d * frac, var, lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(p: f64, seed: u64) -> RandomAccessBernoulli {
        RandomAccessBernoulli::new(p, seed, 0, Lane::sequence(1))
    }

    #[test]
    fn prefix_sums_are_consistent_walks() {
        let mut s = seq(0.3, 11);
        let mut prev = 0i64;
        for k in 1..=2000u64 {
            let g = s.group(k).unwrap();
            let p = s.prefix_sum(k).unwrap();
            assert_eq!(p - prev, g.sign(), "level {k}");
            prev = p;
        }
    }

    #[test]
    fn position_of_inverts_counts() {
        let mut s = seq(0.25, 5);
        for group in [Group::I, Group::II] {
            for index in [1u64, 2, 3, 10, 77, 1000, 123_456, 10_000_000_000] {
                let k = s.position_of(group, index).unwrap();
                assert_eq!(s.group(k).unwrap(), group);
                let plus = s.count_upto(k).unwrap();
                let count = if group == Group::I { plus } else { k - plus };
                assert_eq!(count, index);
            }
        }
    }

    #[test]
    fn density_matches_probability_at_large_scale() {
        for p in [0.25, 0.5, 0.9] {
            let s = seq(p, 3);
            for k in [1_000_000u64, 1 << 40, 1 << 55] {
                let frac = s.count_upto(k).unwrap() as f64 / k as f64;
                // 6 standard deviations of the binomial fraction.
                let tol = 6.0 * (p * (1.0 - p) / k as f64).sqrt();
                assert!((frac - p).abs() < tol, "p={p} k={k} frac={frac}");
            }
        }
    }

    #[test]
    fn small_scale_mean_is_unbiased() {
        // Mean of σ over many independent short prefixes.
        let (p, n, reps) = (0.3, 64u64, 400u64);
        let total: u64 = (0..reps)
            .map(|r| {
                RandomAccessBernoulli::new(p, r, 0, Lane::sequence(1))
                    .count_upto(n)
                    .unwrap()
            })
            .sum();
        let frac = total as f64 / (n * reps) as f64;
        let sd = (p * (1.0 - p) / (n * reps) as f64).sqrt();
        assert!((frac - p).abs() < 4.0 * sd, "{frac}");
    }

    #[test]
    fn degenerate_probabilities() {
        let mut ones = seq(1.0, 0);
        assert_eq!(ones.prefix_sum(1 << 40).unwrap(), 1 << 40);
        assert_eq!(ones.position_of(Group::I, 17).unwrap(), 17);
        assert_eq!(ones.position_of(Group::II, 1), Err(LevelMapError::Overflow));
    }

    #[test]
    fn beyond_capacity_is_overflow() {
        let s = seq(0.5, 0);
        assert_eq!(s.count_upto((1 << DEPTH) + 1), Err(LevelMapError::Overflow));
    }
}
