//! Quantum-correlation measures, monogamy scores and complementarity-derived lower
//! bounds on monogamy violation for small multiqubit states.

pub mod entropy;
pub mod error;
pub mod experiment;
pub mod measures;
pub mod monogamy;
pub mod optimize;
#[cfg(test)]
mod properties;
pub mod states;
pub mod tensor;

pub use error::{Error, Result};
