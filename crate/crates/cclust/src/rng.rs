//! Seed derivation helpers.
//!
//! Every random decision in the crate flows through a `ChaCha8Rng` seeded
//! from an explicit `u64`, or through a stateless per-item hash. Distinct
//! consumers (init, batch shuffling, noise, test-split regeneration) derive
//! their seeds with [`mix_seed`] so streams never collide or alias.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer. Bijective on `u64`, good avalanche behavior.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Derive a sub-seed for an independent stream.
pub fn mix_seed(seed: u64, stream: u64) -> u64 {
    splitmix64(seed ^ splitmix64(stream))
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Map a hash to a uniform value in `[0, 1)` using the top 53 bits.
pub fn unit_from_hash(h: u64) -> f64 {
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
