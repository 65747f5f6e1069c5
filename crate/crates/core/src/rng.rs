//! Seed splitting. Every independent unit of work (a realization, a
//! sample) gets its own ChaCha stream keyed by index, so results do not
//! depend on thread count or scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

pub fn stream(seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Disjoint gate and noise streams for realization `index`.
pub fn realization_streams(seed: u64, index: u64) -> (StreamRng, StreamRng) {
    (stream(seed, 2 * index), stream(seed, 2 * index + 1))
}
