//! Gate-set shadow randomized benchmarking toolkit.
//!
//! One simulated dataset of random gate sequences is post-processed with
//! different probe operators to recover standard, interleaved, simultaneous,
//! correlated and leakage benchmarking decays.

pub mod config;
pub mod error;
pub mod estimation;
pub mod gates;
pub mod groups;
pub mod marginals;
pub mod measurement;
pub mod noise;
pub mod pipeline;
pub mod ptm;
pub mod reproduce;
pub mod simulator;
pub mod stats;
pub mod sparse;
pub mod util;

pub use error::{Error, Result};
