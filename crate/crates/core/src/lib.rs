//! Quantified belief networks: Bayesian networks whose conditional tables
//! hold beta statistics over sample counts, with count-level network
//! transformations and query answering.

pub mod cli;
pub mod error;
pub mod format;
pub mod graph;
pub mod inference;
pub mod learning;
pub mod model;
pub mod oracle;
pub mod transforms;

pub use error::{QbnError, Result};
