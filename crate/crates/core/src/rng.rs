//! The crate's named, seedable, splittable pseudo-random generator.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// ChaCha12 keyed by a 64-bit seed; independent streams come from the stream id.
pub type DgsRng = ChaCha12Rng;

/// Generator for `seed`, stream 0.
pub fn seeded(seed: u64) -> DgsRng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Independent generator for stream `stream` under `seed`.
pub fn stream(seed: u64, stream: u64) -> DgsRng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
