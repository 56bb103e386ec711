//! Batch driver for the `femu` toolkit: JSON-configured forward runs,
//! synthetic measurements, inversion and reporting.
//!
//! Exit codes: 0 success, 2 config or usage error, 3 data error, 4 numerical
//! failure.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod problem;
pub mod report;
pub mod vtk;

pub use config::RunConfig;
pub use error::CliError;
