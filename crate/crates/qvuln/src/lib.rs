//! Dataset IO, checkpoints, training driver and CLI on top of `qvuln-core`.

pub mod checkpoint;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod report;
pub mod synthetic;
pub mod trainer;
pub mod vectors;

pub use error::{Error, Result};
