//! Seeded randomness. Every run owns one 64-bit seed; parties and trials get
//! their own generators through labeled derivation so that runs replay
//! exactly and parallel trials never share a stream.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

pub type SimRng = ChaCha20Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Generator for `(seed, label, index)`, independent of every other triple.
pub fn derive_rng(seed: u64, label: &str, index: u64) -> SimRng {
    let mut h = Sha256::new();
    h.update(seed.to_be_bytes());
    h.update((label.len() as u32).to_be_bytes());
    h.update(label.as_bytes());
    h.update(index.to_be_bytes());
    let key: [u8; 32] = h.finalize().into();
    ChaCha20Rng::from_seed(key)
}
