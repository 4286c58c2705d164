//! Reproducible random streams.
//!
//! All randomness comes from ChaCha20 keyed by the user's 64-bit seed.
//! Independent consumers read disjoint stream ids of the same key, so extra
//! draws in one consumer never shift the values seen by another:
//!
//! | stream id              | consumer                                            |
//! |------------------------|-----------------------------------------------------|
//! | `0`                    | single-distribution samplers; mixture labels        |
//! | `1 + j`                | points of mixture component `j`                     |
//! | [`MEANS`]              | random mean directions of synthetic presets         |
//! | [`SEEDING`] `+ t`      | k-means++ seeding, attempt `t`                      |
//! | [`RANDOM_INIT`] `+ t`  | random balanced partition, attempt `t`              |

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub use rand_chacha::ChaCha20Rng as StreamRng;

/// Stream id for randomly drawn mean directions.
pub const MEANS: u64 = 1 << 40;
/// First stream id used by k-means++ seeding.
pub const SEEDING: u64 = 2 << 40;
/// First stream id used by random initial partitions.
pub const RANDOM_INIT: u64 = 3 << 40;

/// Generator for stream `id` under `seed`.
pub fn stream(seed: u64, id: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Stream carrying the points of mixture component `j`.
pub fn component_stream(seed: u64, j: usize) -> ChaCha20Rng {
    stream(seed, 1 + j as u64)
}
