//! Seed derivation and the generator used throughout the crate.
//!
//! Every random stream is a `Xoshiro256PlusPlus` seeded from a 64-bit value.
//! Substreams are derived with [`derive_seed`], which folds each component
//! through the SplitMix64 finalizer, so `(seed, index)` names a stream
//! independently of how many other streams were consumed before it. Loop
//! `i` of an instance, restart `r` of a solver run and bootstrap resample `b`
//! all draw from `stream(seed, i)`.

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

pub type StreamRng = Xoshiro256PlusPlus;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Order-sensitive 64-bit hash of a sequence of words.
pub fn hash64(words: &[u64]) -> u64 {
    words
        .iter()
        .fold(splitmix64(words.len() as u64), |acc, &w| splitmix64(acc ^ splitmix64(w)))
}

pub fn derive_seed(seed: u64, index: u64) -> u64 {
    hash64(&[seed, index])
}

pub fn stream(seed: u64, index: u64) -> StreamRng {
    StreamRng::seed_from_u64(derive_seed(seed, index))
}

pub fn from_seed(seed: u64) -> StreamRng {
    StreamRng::seed_from_u64(seed)
}

/// Stable 64-bit hash of a string (FNV-1a folded through SplitMix64).
pub fn hash_str(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    splitmix64(h)
}
