//! Seeded random substreams.
//!
//! Every run is driven by one root seed; independent consumers (data
//! generation, parameter init, dropout, batch order, ensemble members)
//! derive their own stream by name so that changing one consumer never
//! shifts the draws seen by another.

use rand_chacha::ChaCha20Rng;
use rand_chacha::rand_core::SeedableRng;
use sha2::{Digest, Sha256};

/// Derive a deterministic RNG for `(root_seed, name)`.
///
/// Member indices and step counters belong in the name, e.g.
/// `substream(seed, &["train", "member", "3", "dropout"])`.
pub fn substream(root_seed: u64, name: &[&str]) -> ChaCha20Rng {
    let mut hasher = Sha256::new();
    hasher.update(root_seed.to_le_bytes());
    for part in name {
        hasher.update([0u8]);
        hasher.update(part.as_bytes());
    }
    let digest = hasher.finalize();
    let mut seed = [0u8; 32];
    seed.copy_from_slice(&digest);
    ChaCha20Rng::from_seed(seed)
}
