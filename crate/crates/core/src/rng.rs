//! Seed derivation and the simulation generator.
//!
//! Every stochastic component draws from a [`ChaCha8Rng`] whose seed is
//! derived from a master seed and a stream index through SplitMix64. Both the
//! generator and the derivation are implementation constants: changing either
//! would silently change every golden output, so they are documented here and
//! must stay stable across versions.
//!
//! Independent streams make results order-independent: Monte-Carlo path `i`
//! always uses `derive_seed(master, i)`, so an ensemble is bit-identical
//! whether paths run sequentially or on any number of threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 output function (Steele, Lea & Flood 2014).
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives an independent stream seed from `(master, stream)`.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    splitmix64(splitmix64(master) ^ splitmix64(stream))
}

/// Builds the simulation generator for one derived stream.
pub fn stream_rng(master: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, stream))
}
