//! Seedable random streams and seed derivation.
//!
//! Every stochastic operation takes a [`Stream`] explicitly. Independent
//! streams for experiment cells are derived from a base seed and a tuple of
//! integers with [`derive_seed`], so no coordination is needed between
//! workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used throughout the crate.
pub type Stream = ChaCha8Rng;

pub fn stream(seed: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds `parts` into `base`: `h ← mix64(h ⊕ mix64(part + i))` for each part
/// in order. Distinct tuples give statistically independent seeds.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    parts.iter().enumerate().fold(mix64(base), |h, (i, &p)| {
        mix64(h ^ mix64(p.wrapping_add((i as u64).wrapping_mul(0x632b_e59b_d9b4_e019))))
    })
}
