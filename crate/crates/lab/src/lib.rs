//! Experiment runner around `hls-core`: JSON configs and reports, CSV
//! tables, seeded random inputs, brute-force oracles and the verification
//! suites behind the `hlslab` binary.

pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod json;
pub mod oracle;
pub mod sampling;
pub mod studies;
pub mod suites;

pub use error::{LabError, LabResult};
