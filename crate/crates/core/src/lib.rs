//! Quantum neural network training on a statevector simulator, with
//! parameter-shift gradients and probabilistic gradient pruning.

pub mod bench;
pub mod data;
pub mod error;
pub mod grad;
pub mod models;
pub mod noise;
pub mod optim;
pub mod par;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};
