use rand_chacha::ChaCha8Rng;
use rand_distr::{Bernoulli, Distribution};

use super::rng::{stream_rng, Lane};
use crate::indicator::{Group, IndicatorSource};
use crate::levelmap::LevelMapError;

/// Bernoulli sequence read front to back without storing it.
///
/// Draws the same values as [`super::bernoulli_sequence`] with the same
/// arguments. Queries at or past the current position cost the distance
/// scanned; an earlier query replays the stream from level 1. Levels beyond
/// `limit` are reported as truncated.
pub(crate) struct ScanningBernoulli {
    dist: Bernoulli,
    seed: u64,
    stream_id: u64,
    lane: Lane,
    rng: ChaCha8Rng,
    pos: u64,
    plus: u64,
    last: Group,
    limit: u64,
}

impl ScanningBernoulli {
    pub(crate) fn new(p: f64, seed: u64, stream_id: u64, lane: Lane, limit: u64) -> Self {
        Self {
            dist: Bernoulli::new(p).expect("probability in [0, 1]"),
            seed,
            stream_id,
            lane,
            rng: stream_rng(seed, stream_id, lane, 0),
            pos: 0,
            plus: 0,
            last: Group::I,
            limit,
        }
    }

    pub(crate) fn raise_limit(&mut self, limit: u64) {
        self.limit = self.limit.max(limit);
    }

    fn rewind(&mut self) {
        self.rng = stream_rng(self.seed, self.stream_id, self.lane, 0);
        self.pos = 0;
        self.plus = 0;
    }

    #[inline]
    fn draw(&mut self) -> bool {
        let hit = self.dist.sample(&mut self.rng);
        self.pos += 1;
        self.plus += u64::from(hit);
        hit
    }

    fn seek(&mut self, k: u64) -> Result<(), LevelMapError> {
        if k > self.limit {
            return Err(LevelMapError::Truncated {
                needed: k,
                available: self.limit,
            });
        }
        if k < self.pos {
            self.rewind();
        }
        if self.pos < k {
            let mut hit = false;
            while self.pos < k {
                hit = self.draw();
            }
            self.last = if hit { Group::I } else { Group::II };
        }
        Ok(())
    }

    fn members(&self, group: Group) -> u64 {
        match group {
            Group::I => self.plus,
            Group::II => self.pos - self.plus,
        }
    }
}

impl IndicatorSource for ScanningBernoulli {
    fn group(&mut self, k: u64) -> Result<Group, LevelMapError> {
        if k == 0 {
            return Err(LevelMapError::InvalidLevel(0));
        }
        self.seek(k)?;
        Ok(self.last)
    }

    fn prefix_sum(&mut self, k: u64) -> Result<i64, LevelMapError> {
        self.seek(k)?;
        Ok(2 * self.plus as i64 - k as i64)
    }

    fn position_of(&mut self, group: Group, index: u64) -> Result<u64, LevelMapError> {
        if index == 0 {
            return Err(LevelMapError::InvalidLevel(0));
        }
        if self.members(group) > index || (self.members(group) == index && self.last != group) {
            self.rewind();
        }
        while self.members(group) < index {
            if self.pos >= self.limit {
                return Err(LevelMapError::GroupExhausted {
                    group,
                    index,
                    available: self.members(group),
                    len: self.pos,
                });
            }
            let hit = self.draw();
            self.last = if hit { Group::I } else { Group::II };
        }
        Ok(self.pos)
    }
}
