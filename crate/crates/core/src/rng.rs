//! Seeded random streams.
//!
//! Every random consumer derives a ChaCha8 generator from `(seed, stream)`.
//! ChaCha is counter based, so stream `k` of a seed is independent of how many
//! other streams were drawn before it. Monte Carlo sample `k` always uses
//! stream `k`, which makes serial and parallel runs bit-identical.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Distinct stream ids for different consumers sharing one user seed.
pub mod streams {
    pub const GRAPH: u64 = 1 << 40;
    pub const COMMUNITIES: u64 = (1 << 40) + 1;
    pub const EIGEN_START: u64 = (1 << 40) + 2;
    pub const EIGEN_RESTART: u64 = (1 << 40) + 3;
    pub const MODEL_INIT: u64 = (1 << 40) + 4;
    pub const LABEL_SPLIT: u64 = (1 << 40) + 5;
}
