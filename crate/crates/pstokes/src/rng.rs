//! Reproducible random streams.
//!
//! Every stochastic routine takes a `(seed, stream)` pair and draws from a
//! counter-based ChaCha stream, so results do not depend on evaluation order
//! and independent jobs can split streams without coordination.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent stream `stream` of the generator seeded by `seed`.
pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream.into());
    rng
}
