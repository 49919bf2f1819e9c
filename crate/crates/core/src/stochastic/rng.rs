use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TAG: &[u8; 8] = b"adiabat1";

/// Independent sub-stream selector. Every randomized object draws from a
/// ChaCha8 keyed by `(seed, stream_id, lane)`, so results do not depend on
/// how work is scheduled across threads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Lane(pub u64);

impl Lane {
    const SEQUENCE: u64 = 0;
    const TRIAL: u64 = 1;
    const PERIOD: u64 = 2;

    fn make(kind: u64, index: u64, which: u8) -> Lane {
        debug_assert!(index < 1 << 59);
        Lane(kind << 62 | index << 2 | u64::from(which & 3))
    }

    /// Stand-alone sequence `which` (1 for σ₁, 2 for σ₂).
    pub fn sequence(which: u8) -> Lane {
        Lane::make(Self::SEQUENCE, 0, which)
    }

    /// Sequence `which` of Monte Carlo trial `trial`.
    pub fn trial(trial: u64, which: u8) -> Lane {
        Lane::make(Self::TRIAL, trial, which)
    }

    /// Sequence `which` redrawn for period `period`.
    pub fn period(period: u64, which: u8) -> Lane {
        Lane::make(Self::PERIOD, period, which)
    }
}

pub(crate) fn stream_rng(seed: u64, stream_id: u64, lane: Lane, substream: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&stream_id.to_le_bytes());
    key[16..24].copy_from_slice(&lane.0.to_le_bytes());
    key[24..].copy_from_slice(TAG);
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(substream);
    rng
}
