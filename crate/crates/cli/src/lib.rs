//! Batch verification suites over `prismatic-core` with JSON reports.

pub mod config;
pub mod report;
pub mod suites;

pub use config::{Args, ConfigError, Suite, SuiteConfig};
pub use report::{Check, Report, Status};
pub use suites::run_suite;

/// Exit status for configuration and I/O errors.
pub const CONFIG_ERROR: u8 = 3;
