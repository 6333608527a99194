//! Dance-hit prediction from audio analysis features.
//!
//! The pipeline turns chart listings and per-song audio analyses into a
//! gap-labeled dataset of 138 features, optionally selects features with a
//! CFS-guided genetic search, trains one of five classifier families and
//! evaluates them with repeated stratified cross-validation.

pub mod classifiers;
pub mod commands;
pub mod config;
pub mod datamodel;
pub mod error;
pub mod eval;
pub mod features;
pub mod pipeline;
pub mod preprocess;
pub mod seed;
pub mod synthetic;

pub use error::{Error, Result};
