//! Simulation and analysis of the rule-150 quantum cellular automaton on a
//! ring of K cells.

pub mod bitconfig;
pub mod classical;
pub mod cli;
pub mod error;
pub mod evolution;
pub mod spectral;
pub mod stats;

pub use error::{QcaError, Result};
