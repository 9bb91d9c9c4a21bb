//! Similarity measures for pools of introductory-programming items.
//!
//! The crate covers the whole measurement pipeline: corpora of items with
//! statements, solutions and learner performance ([`corpus`]); feature
//! matrices and their transformations ([`features`]); item similarity
//! matrices ([`similarity`]); low-dimensional projections ([`projection`]);
//! agreement between measures and clustering evaluation ([`analysis`]); a
//! synthetic corpus generator ([`synth`]); and the batch front end behind the
//! `itemsim` binary ([`cli`]).

pub mod analysis;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod features;
pub mod projection;
pub mod similarity;
pub mod stats;
pub mod synth;
pub mod table;

pub use error::{Error, Result};
