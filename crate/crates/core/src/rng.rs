//! Reproducible random streams.
//!
//! Every random draw in the crate comes from [`stream`]: the 32-byte ChaCha12
//! key is `SHA-256(seed as u64 LE ‖ tag bytes ‖ 0x00 ‖ index as u64 LE)`.
//! Distinct `(tag, index)` pairs give independent streams, and the output is
//! identical across platforms.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use sha2::{Digest, Sha256};

pub type Rng = ChaCha12Rng;

pub fn stream(seed: u64, tag: &str, index: u64) -> Rng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(tag.as_bytes());
    hasher.update([0u8]);
    hasher.update(index.to_le_bytes());
    let key: [u8; 32] = hasher.finalize().into();
    ChaCha12Rng::from_seed(key)
}

/// Folds a byte string into a 64-bit seed (first 8 bytes of its SHA-256).
pub fn hash_seed(bytes: &[u8]) -> u64 {
    let digest = Sha256::digest(bytes);
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}
