//! Seeded random streams.
//!
//! Every random quantity in the library comes from a [`VmfRng`], which is
//! ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with `seed_from_u64(seed)` and
//! positioned on a stream selected by a purpose tag. ChaCha8 output is
//! specified independently of platform and word size, so a `(seed, tag)` pair
//! reproduces the same draws on every build.
//!
//! | purpose                         | tag                    |
//! |---------------------------------|------------------------|
//! | vMF draws                       | [`TAG_DRAW`]           |
//! | mixture component selection     | [`TAG_SELECT`]         |
//! | Monte-Carlo sphere points       | [`TAG_SPHERE_MC`]      |
//! | EM initialization               | [`TAG_EM_INIT`]        |
//! | k-medoids tie-breaking          | [`TAG_MEDOID_TIES`]    |
//! | k-means restarts                | [`TAG_KMEANS`]         |
//! | experiment parameter draws      | [`TAG_EXPERIMENT`]     |
//!
//! Sub-seeds for indexed work items (restarts, matrix cells, experiment
//! stages) are derived with [`derive_seed`], a SplitMix64 fold over the parts.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used throughout the crate.
pub type VmfRng = ChaCha8Rng;

pub const TAG_DRAW: u64 = 1;
pub const TAG_SELECT: u64 = 2;
pub const TAG_SPHERE_MC: u64 = 3;
pub const TAG_EM_INIT: u64 = 4;
pub const TAG_MEDOID_TIES: u64 = 5;
pub const TAG_KMEANS: u64 = 6;
pub const TAG_EXPERIMENT: u64 = 7;

/// Generator for `seed` positioned on stream `tag`.
pub fn stream(seed: u64, tag: u64) -> VmfRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(tag);
    rng
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic sub-seed for `seed` and an index path.
pub fn derive_seed(seed: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix64(seed), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}
