//! Stable seed derivation.
//!
//! Every random stream in the crate is derived from a root seed by mixing in
//! integer or string labels. The mixing is fixed (splitmix64 finalizer over an
//! FNV-1a digest for strings) so that derived seeds do not depend on the
//! standard library's hasher, the platform, or the process.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// FNV-1a over the UTF-8 bytes of `label`.
pub fn hash_str(label: &str) -> u64 {
    fnv1a(label.as_bytes())
}

/// 64-bit FNV-1a over raw bytes.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

/// Derive a child seed from `root` and an ordered list of integer labels.
pub fn derive(root: u64, labels: &[u64]) -> u64 {
    labels
        .iter()
        .fold(splitmix(root), |acc, &l| splitmix(acc ^ splitmix(l)))
}

/// Derive a child seed from `root` and a string label.
pub fn derive_str(root: u64, label: &str) -> u64 {
    derive(root, &[hash_str(label)])
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
