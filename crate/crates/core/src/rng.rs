//! Seeded random streams.
//!
//! Every stochastic routine draws from ChaCha20 (as implemented by
//! `rand_chacha`), keyed by `seed_from_u64(seed)` and separated into
//! independent streams with the 64-bit ChaCha stream id. Chain `c` of a run
//! with seed `s` uses stream `c`, so adding chains never perturbs earlier
//! ones.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type Rng = ChaCha20Rng;

/// Stream reserved for data generation so simulated data never shares a
/// stream with a sampler chain under the same seed.
pub const SIMULATION_STREAM: u64 = u64::MAX;

pub fn stream(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
