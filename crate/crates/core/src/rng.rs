//! Seeded RNG construction and the seed-derivation schedule.
//!
//! Every stochastic step in the pipeline draws from a ChaCha stream seeded
//! through [`mix_seed`], so sibling computations (tree children, leaf
//! trainings, stream shards) get independent but reproducible streams:
//! child seed = parent seed mixed with child index.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed from a parent seed and a child index.
pub fn mix_seed(parent: u64, child: u64) -> u64 {
    splitmix64(parent ^ splitmix64(child))
}

/// Deterministic RNG for a given seed.
pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
