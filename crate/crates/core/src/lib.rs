//! Recursive Clifford noise reduction: trees, compilation, Pauli-frame
//! simulation, closed-form bounds and the Markov performance model.

pub mod bounds;
pub mod clifford;
pub mod compiler;
pub mod error;
pub mod estimate;
pub mod markov;
pub mod sim;
pub mod sweep;
pub mod tree;

pub use error::{Error, Result};
