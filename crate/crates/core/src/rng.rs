//! Seeded random streams.
//!
//! Every random draw in the crate comes from a [`SimRng`] built from an
//! explicit 64-bit seed. Independent consumers of the same seed (network
//! construction, destination draws, per-batch sampling) use distinct ChaCha
//! stream ids so that they never share a keystream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Stream used by network construction.
pub const NETWORK_STREAM: u64 = 0;
/// Stream used for query destinations in experiments.
pub const DESTINATION_STREAM: u64 = 1;
/// First stream handed out to verification batches; batch `i` gets `BATCH_STREAM_BASE + i`.
pub const BATCH_STREAM_BASE: u64 = 1 << 32;

pub fn seeded(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn stream(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
