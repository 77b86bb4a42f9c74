//! Counter-based random streams.
//!
//! Every replicate of an experiment owns the stream `(base_seed, replicate)`,
//! further split by purpose so that observation times and path values never
//! share a generator.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a stream is used for. Encoded in the low bits of the ChaCha stream id.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    Times = 1,
    Values = 2,
    Aux = 3,
}

/// Deterministic generator for `(base_seed, index, purpose)`.
pub fn stream(base_seed: u64, index: u64, purpose: Purpose) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream((index << 4) | purpose as u64);
    rng
}
