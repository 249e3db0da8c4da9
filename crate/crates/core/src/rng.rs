//! Seeded random streams.
//!
//! Every randomized task draws from a stream keyed by `(master seed, task
//! index)`, so a task produces the same numbers whether it runs alone, in a
//! batch, or on another worker.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

pub fn stream(seed: u64, task: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(task);
    rng
}
