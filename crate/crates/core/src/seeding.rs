//! Counter-based seed derivation.
//!
//! Every random draw in the crate is keyed by a tuple of integers that is
//! folded through the SplitMix64 finalizer. Keys never depend on how many
//! draws happened before, so results are stable when inputs are added or
//! reordered.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds a sequence of words into one 64-bit key.
pub fn key(parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(0x6a09_e667_f3bc_c908, |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// Uniform in `[0, 1)` from a key, using the top 53 bits.
pub fn unit(k: u64) -> f64 {
    (splitmix64(k) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

pub fn rng(k: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(k)
}

/// FNV-1a of a string, for turning ids and tags into key words.
pub fn hash_str(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Named sub-stream of a master seed.
pub fn derive(master: u64, stream: &str) -> u64 {
    key(&[master, hash_str(stream)])
}
