//! Seed derivation and the pinned random generator.
//!
//! Every random draw is keyed by the run seed plus the identity of what is
//! being drawn for, so results do not depend on processing order or thread
//! count. The derived seed is
//!
//! ```text
//! fnv1a64( seed as 8 little-endian bytes ‖ 0x1F ‖ part₁ ‖ 0x1F ‖ part₂ ‖ … )
//! ```
//!
//! and feeds a ChaCha8 stream generator (`ChaCha8Rng::seed_from_u64`).

use nerperturb_backend::Fnv1a;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEPARATOR: u8 = 0x1f;

pub fn derive_seed(seed: u64, parts: &[&[u8]]) -> u64 {
    let mut h = Fnv1a::new();
    h.write(&seed.to_le_bytes());
    for part in parts {
        h.write(&[SEPARATOR]).write(part);
    }
    h.finish()
}

/// Seed for per-sentence draws (random candidate selection).
pub fn sentence_seed(seed: u64, sentence_id: &str) -> u64 {
    derive_seed(seed, &[sentence_id.as_bytes()])
}

/// Seed for per-token draws (synonym choice); the index is hashed in decimal.
pub fn token_seed(seed: u64, sentence_id: &str, index: usize) -> u64 {
    derive_seed(seed, &[sentence_id.as_bytes(), index.to_string().as_bytes()])
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Moves a uniform sample of `count` items to the front of `items`, in draw
/// order (partial Fisher-Yates). Drawing fewer items yields a prefix of the
/// order obtained by drawing more with the same generator state.
pub fn partial_shuffle<T, R: Rng>(items: &mut [T], count: usize, rng: &mut R) {
    let n = items.len();
    for i in 0..count.min(n) {
        let j = rng.random_range(i..n);
        items.swap(i, j);
    }
}
