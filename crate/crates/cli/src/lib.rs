//! Command-line driver for the synembed pipeline.

pub mod commands;
pub mod config;
pub mod extract;
pub mod selftest;

use synembed::{Error, ErrorKind};

/// Name of the environment variable that sets the output directory.
pub const OUT_DIR_ENV: &str = "SYNEMBED_OUT_DIR";

/// 2 for configuration errors, 3 for data errors, 4 for numerical failures.
pub fn exit_code(err: &Error) -> i32 {
    match err.kind() {
        ErrorKind::Config => 2,
        ErrorKind::Data => 3,
        ErrorKind::Numerical => 4,
    }
}
