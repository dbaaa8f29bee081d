//! Deterministic random streams.
//!
//! Every stochastic routine takes its randomness from a ChaCha8 stream keyed
//! by `(master_seed, index)`. ChaCha is counter based, so stream `i` of a
//! master seed is fixed regardless of how many other streams were consumed or
//! in what order trials ran.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

/// Independent stream number `index` derived from `master_seed`.
pub fn stream(master_seed: u64, index: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}
