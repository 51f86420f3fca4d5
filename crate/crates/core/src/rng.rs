//! Seeding conventions.
//!
//! All randomness uses `ChaCha8Rng`, which produces the same stream on every
//! platform for a given seed. Independent per-item streams (one per test
//! document, one per fold-in chain) derive their seed from the global seed and
//! the item index with a SplitMix64 finalizer, so results do not depend on the
//! order or thread in which items are processed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of the `index`-th independent stream under `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ index)
}

pub fn derived_rng(seed: u64, index: u64) -> Rng {
    rng(derive_seed(seed, index))
}
