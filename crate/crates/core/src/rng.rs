//! Seeded random streams.
//!
//! Every experiment draws from ChaCha8 keyed by the run seed, with one
//! stream per trial index. Trial `k` therefore sees the same numbers no
//! matter how many trials run or in which order they execute.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Name and version of the generator, echoed into experiment output.
pub const GENERATOR: &str = "chacha8-stream/v1";

/// Generator for a single-stream run.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    trial_stream(seed, 0)
}

/// Independent substream for trial `trial` of a run seeded with `seed`.
pub fn trial_stream(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}
