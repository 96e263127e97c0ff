//! Seeding helpers.
//!
//! Every stochastic routine in this crate draws from a ChaCha8 generator
//! constructed from an explicit seed. Parallel loops give each replicate its
//! own stream derived from (master seed, task index), so results do not
//! depend on thread count or scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator for a caller-supplied seed (stream 0).
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent generator for one task of a seeded parallel run.
pub fn replicate_rng(master_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

/// Stream id for replicate `rep` of batch `batch`, keeping the streams of
/// distinct batches (sample-size pairs, alternative parameters) disjoint.
pub fn batch_stream(batch: u64, rep: u64) -> u64 {
    debug_assert!(rep < 1 << 40);
    (batch << 40) | rep
}
