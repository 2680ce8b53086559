//! Config-driven runner around `geofix`: builds instances from TOML, runs
//! the iterations, audits every certificate and writes CSV.

pub mod commands;
pub mod config;
pub mod output;
pub mod suite;

use thiserror::Error;

/// Exit status for runs whose checks all hold.
pub const EXIT_PASS: i32 = 0;
/// Exit status when some mathematical check fails.
pub const EXIT_FAIL: i32 = 1;
/// Exit status for configuration and usage errors.
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] geofix::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl HarnessError {
    /// Every harness error is a configuration or environment problem.
    pub fn exit_code(&self) -> i32 {
        EXIT_USAGE
    }
}
