//! Deterministic random streams.
//!
//! Every consumer of randomness derives its generator from the run's single
//! `rng_seed` plus a fixed stream id, so stages never share or reorder draws.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const STREAM_RX_NOISE: u64 = 1;
pub const STREAM_GLITCH: u64 = 2;
pub const STREAM_FRAMES: u64 = 3;

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
