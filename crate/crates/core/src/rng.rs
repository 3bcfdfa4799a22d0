//! Per-replicate random streams.
//!
//! Replicate `r` of a run seeded with `master` draws from
//! `ChaCha8Rng::seed_from_u64(replicate_seed(master, r))`, so its data does not
//! depend on which thread runs it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type ReplicateRng = ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Child seed `splitmix64(splitmix64(master) + (r + 1) * golden_gamma)`.
pub fn replicate_seed(master: u64, replicate: u64) -> u64 {
    splitmix64(splitmix64(master).wrapping_add(replicate.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

pub fn replicate_rng(master: u64, replicate: u64) -> ReplicateRng {
    ChaCha8Rng::seed_from_u64(replicate_seed(master, replicate))
}

/// Independent stream for an auxiliary purpose (e.g. a procedure's own
/// randomization) within one replicate.
pub fn stream_rng(master: u64, replicate: u64, stream: u64) -> ReplicateRng {
    ChaCha8Rng::seed_from_u64(splitmix64(replicate_seed(master, replicate) ^ splitmix64(stream.wrapping_add(0x5eed))))
}
