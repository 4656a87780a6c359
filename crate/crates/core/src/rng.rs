//! Seeded randomness.
//!
//! Every random draw in the crate comes from ChaCha8 (`rand_chacha`) seeded
//! with a 64-bit seed and a stream number, so that independent consumers
//! (generator init, discriminator init, batch shuffling, episode sampling)
//! never perturb each other's sequences.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Well-known stream numbers.
pub mod streams {
    pub const WORLD: u64 = 1;
    pub const GENERATOR_INIT: u64 = 10;
    pub const DISCRIMINATOR_INIT: u64 = 11;
    pub const SHUFFLE: u64 = 12;
    pub const VALIDATION_SPLIT: u64 = 13;
    pub const EPISODES: u64 = 20;
}
