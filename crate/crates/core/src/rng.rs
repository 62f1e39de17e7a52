//! Seed splitting for reproducible Monte Carlo runs.
//!
//! Every random draw comes from a ChaCha8 stream keyed by the master seed.
//! The ChaCha stream id is the trial index and each consumer inside a trial
//! (messages, per-receiver noise, ...) owns a lane: a disjoint window of
//! `2^32` words starting at `lane << 32` in that stream. A trial's draws are
//! therefore a function of `(seed, trial, lane)` alone, independent of which
//! worker runs it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Lane used for message draws.
pub const LANE_MESSAGES: u32 = 0;
/// First lane used for noise; receiver `j` uses `LANE_NOISE + j`.
pub const LANE_NOISE: u32 = 1;

/// A master seed from which per-trial substreams are derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedSplit {
    master: u64,
}

impl SeedSplit {
    pub fn new(master: u64) -> Self {
        Self { master }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    /// The generator for `(trial, lane)`.
    pub fn stream(&self, trial: u64, lane: u32) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        rng.set_stream(trial);
        rng.set_word_pos((lane as u128) << 32);
        rng
    }
}

/// Generator for one-off draws such as sampling a code matrix.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
