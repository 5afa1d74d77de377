//! Seed derivation for reproducible per-item random streams.
//!
//! Every stochastic component takes an explicit RNG. Streams are derived from
//! a root seed plus a list of stream coordinates (epoch, item index, trial id,
//! ...) so that any item can be recomputed independently of iteration order,
//! which is what makes parallel prefetch and resumable search deterministic.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The RNG used throughout the crate. ChaCha8 is portable and its stream is
/// stable across platforms and releases, unlike `StdRng`.
pub type Stream = ChaCha8Rng;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Mixes a root seed with stream coordinates into a single 64-bit seed.
///
/// A plain `seed ^ epoch ^ index` would collide for e.g. (epoch 1, item 2)
/// and (epoch 2, item 1); feeding each coordinate through splitmix64 keeps
/// the streams distinct.
pub fn derive_seed(root: u64, coords: &[u64]) -> u64 {
    let mut acc = splitmix64(root);
    for &c in coords {
        acc = splitmix64(acc ^ splitmix64(c.wrapping_add(0x517cc1b727220a95)));
    }
    acc
}

/// Creates the RNG stream for the given root seed and coordinates.
pub fn stream(root: u64, coords: &[u64]) -> Stream {
    ChaCha8Rng::seed_from_u64(derive_seed(root, coords))
}
