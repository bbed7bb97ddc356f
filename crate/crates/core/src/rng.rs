//! Seeded random streams.
//!
//! Every consumer of randomness (design draws, weight init, batch order,
//! Monte-Carlo shards) takes its own ChaCha8 stream derived from a `(seed,
//! stream)` pair, so trials never share state and reruns are bitwise stable.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub const STREAM_INIT: u64 = 1;
pub const STREAM_SHUFFLE: u64 = 2;
pub const STREAM_DESIGN: u64 = 3;
pub const STREAM_TEST_POINTS: u64 = 4;
/// Monte-Carlo shards use `STREAM_MC_BASE + shard`.
pub const STREAM_MC_BASE: u64 = 1 << 32;

pub fn stream(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Derive an independent child seed, e.g. one per trial.
pub fn child_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 finalizer over the pair
    let mut z = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
