//! Cross-lingual multi-task news genre and framing classification.
//!
//! The crate covers the whole experimentation loop: dataset handling
//! ([`corpus`]), hashed n-gram features ([`features`]), a multi-task
//! classifier with masked and class-weighted losses ([`model`]), evaluation
//! measures ([`metrics`]), a two-stage random hyperparameter search with a
//! persistent trial registry ([`search`]), ensemble construction and
//! postprocessing ([`ensemble`]) and paradigm comparison reports
//! ([`report`]). The `genreframe` binary wires these together ([`cli`]).

pub mod error;
pub mod labels;
pub mod corpus;
pub mod features;
pub mod model;
pub mod metrics;
pub mod search;
pub mod ensemble;
pub mod report;
pub mod cli;
pub mod synth;

pub use error::{Error, Result};
