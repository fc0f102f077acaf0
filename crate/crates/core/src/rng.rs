//! Seeded random number streams.
//!
//! Every run is driven by ChaCha20 seeded from a 64-bit root seed. Independent
//! chains and replicates use separate ChaCha streams of the same key, so
//! stream `k` of seed `s` is identical on every platform.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type ZaniRng = ChaCha20Rng;

/// Identifier recorded in output metadata.
pub const RNG_ALGORITHM: &str = "chacha20 (rand_chacha 0.9, seed_from_u64, stream split)";

pub fn rng_from_seed(seed: u64) -> ZaniRng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Stream `stream` of the generator keyed by `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ZaniRng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
