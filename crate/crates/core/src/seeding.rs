//! Counter-based RNG streams.
//!
//! Every experiment takes one master seed. Independent units (pairs,
//! trials, repetitions) draw from ChaCha8 stream `k` of that seed, so the
//! numbers a unit sees do not depend on the order units run in.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn stream(seed: u64, stream_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

/// Stream id for the unordered pair `(i, j)`, `i < j`, in an `n`-point set.
pub fn pair_stream(i: usize, j: usize, n: usize) -> u64 {
    (i * n + j) as u64
}
