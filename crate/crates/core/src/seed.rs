//! Deterministic seed splitting.
//!
//! Every stochastic routine takes a `u64` seed and builds its own
//! [`ChaCha8Rng`]. Child streams are derived by hashing the parent seed with
//! a path of integer tags through SplitMix64, so `(master, cell, rep)` always
//! maps to the same stream regardless of scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from `parent` and a path of tags.
pub fn derive_seed(parent: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(parent), |acc, &tag| {
        splitmix64(acc ^ splitmix64(tag.wrapping_add(0x632B_E59B_D9B4_E019)))
    })
}

/// RNG for `seed`.
pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// RNG for the child stream `path` of `seed`.
pub fn child_rng(seed: u64, path: &[u64]) -> Rng {
    rng(derive_seed(seed, path))
}
