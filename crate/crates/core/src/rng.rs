//! Deterministic random substreams.
//!
//! Each stream is a ChaCha8 generator keyed by the SHA-256 of the global seed
//! and a list of stable labels (criterion id, indicator id, purpose), so the
//! numbers a column receives never depend on evaluation order or threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type Stream = ChaCha8Rng;

pub fn substream(seed: u64, labels: &[&str]) -> Stream {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    for label in labels {
        hasher.update((label.len() as u64).to_le_bytes());
        hasher.update(label.as_bytes());
    }
    let digest: [u8; 32] = hasher.finalize().into();
    ChaCha8Rng::from_seed(digest)
}
