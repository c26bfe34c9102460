//! Keyed random streams.
//!
//! Every random draw in a run comes from a ChaCha stream whose seed is a pure
//! function of the run seed and a [`Stream`] key. Evaluations can therefore run
//! in any order, on any number of threads, and still reproduce bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Identifies one independent random stream inside a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Stream {
    /// Parameter initialization.
    Init,
    /// Mini-batch selection at a training step.
    Batch { step: u64 },
    /// Pruning subset draw at a training step.
    Subset { step: u64 },
    /// Unshifted forward evaluation of one batch sample.
    Forward { step: u64, sample: u64 },
    /// Shifted evaluation of one gate occurrence of a parameter.
    /// `sign` is +1 or -1.
    Shift {
        step: u64,
        sample: u64,
        param: u64,
        gate: u64,
        sign: i8,
    },
    /// Evaluation pass (validation or train accuracy) at a given step.
    Eval { step: u64, split: u8, sample: u64 },
    /// Free-form key for tests and benchmarks.
    Custom(u64, u64),
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Stream {
    fn words(&self) -> [u64; 6] {
        match *self {
            Stream::Init => [1, 0, 0, 0, 0, 0],
            Stream::Batch { step } => [2, step, 0, 0, 0, 0],
            Stream::Subset { step } => [3, step, 0, 0, 0, 0],
            Stream::Forward { step, sample } => [4, step, sample, 0, 0, 0],
            Stream::Shift {
                step,
                sample,
                param,
                gate,
                sign,
            } => [5, step, sample, param, gate, sign as i64 as u64],
            Stream::Eval {
                step,
                split,
                sample,
            } => [6, step, split as u64, sample, 0, 0],
            Stream::Custom(a, b) => [7, a, b, 0, 0, 0],
        }
    }
}

/// Builds the generator for `stream` under run seed `seed`.
pub fn stream_rng(seed: u64, stream: Stream) -> StreamRng {
    let mut h = splitmix(seed);
    for w in stream.words() {
        h = splitmix(h ^ w);
    }
    let mut key = [0u8; 32];
    for (i, chunk) in key.chunks_mut(8).enumerate() {
        h = splitmix(h.wrapping_add(i as u64));
        chunk.copy_from_slice(&h.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}
