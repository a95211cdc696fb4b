//! The pinned random generator.
//!
//! Every stochastic operation takes a `u64` seed and builds a [`SimRng`]
//! (ChaCha with 8 rounds, `rand_chacha` stream 0). ChaCha output is specified
//! independently of platform and crate version, so seeded results are stable.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent child seed, e.g. one per replica.
pub fn child_seed(seed: u64, index: u64) -> u64 {
    // SplitMix64 finaliser over the pair.
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
