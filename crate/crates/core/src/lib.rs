//! Numerical core for hybrid classical/quantum recurrent vulnerability
//! classifiers.
//!
//! Everything here is `no_std` with `alloc`: a dense statevector simulator,
//! variational quantum circuits with parameter-shift gradients, a classical
//! LSTM with exact backpropagation through time, the six-circuit quantum LSTM
//! cell, code tokenization and vocabulary handling, embedding matrices,
//! binary classification metrics, and the epoch-level training loop.
//!
//! File formats, timing, and the command line live in the `qvuln` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

mod error;
mod math;

pub mod embedding;
pub mod gradcheck;
pub mod metrics;
pub mod model;
pub mod neural;
pub mod qlstm;
pub mod qsim;
pub mod sine;
pub mod tensor;
pub mod text;
pub mod training;
pub mod vqc;

pub use error::{Error, Result};
pub use math::{sigmoid, tanh};
