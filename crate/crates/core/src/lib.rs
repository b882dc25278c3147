//! Coverage-guided fuzzing of a toy processor, with seed scheduling driven by
//! multi-armed bandits that replace saturated arms.
//!
//! * [`bandit`]: ε-greedy, UCB and EXP3 with arm resets.
//! * [`coverage`]: global/per-arm coverage, the local/global reward, and the
//!   saturation monitor.
//! * [`testgen`]: tests, seed generation, mutation, FIFO pools.
//! * [`dut`]: the instrumented toy core, its golden model, and the trace diff.
//! * [`fuzzer`]: the campaign loops and speedup comparison.

pub mod bandit;
pub mod coverage;
pub mod dut;
mod error;
pub mod fuzzer;
pub mod testgen;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use error::{Error, Result};

/// Stream of [`rng_stream`] that drives arm selection.
pub const STREAM_BANDIT: u64 = 1;
/// Stream that drives seed generation and mutation.
pub const STREAM_TESTGEN: u64 = 2;

/// Independent ChaCha stream `stream` of the campaign seed `seed`.
pub fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
