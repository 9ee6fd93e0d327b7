//! Seeded random streams shared by every sampler in the crate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Independent ChaCha8 stream `stream` of `seed`. Same pair, same sequence,
/// on every platform.
pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform draw in `[lo, hi]`; returns `lo` exactly for a collapsed range.
pub fn uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}
