//! Monte Carlo simulation of end-to-end entanglement delivery over linear
//! quantum repeater chains, with an exact oracle for small chains.

pub mod chain;
pub mod cli;
pub mod engine;
pub mod error;
pub mod fidelity;
pub mod oracle;
pub mod policies;
pub mod stats;
pub mod sweep;

pub use error::{Error, Result};
