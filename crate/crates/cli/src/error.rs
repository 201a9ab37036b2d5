//! CLI error with the exit code taxonomy.
//!
//! Exit codes: 0 success (for `detect`: alarm raised), 2 usage errors
//! (from argument parsing), 3 configuration/parameter errors, 4
//! calibration failure, 5 censoring budget exceeded, 6 I/O errors, 7
//! `detect` reached the end of its input without an alarm.

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Calibration(String),
    Censoring(String),
    Io(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn io(msg: impl Into<String>) -> Self {
        CliError::Io(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 3,
            CliError::Calibration(_) => 4,
            CliError::Censoring(_) => 5,
            CliError::Io(_) => 6,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "{m}"),
            CliError::Calibration(m) => write!(f, "calibration failed: {m}"),
            CliError::Censoring(m) => write!(f, "{m}"),
            CliError::Io(m) => write!(f, "{m}"),
        }
    }
}

impl From<wdcusum::Error> for CliError {
    fn from(err: wdcusum::Error) -> Self {
        match err {
            wdcusum::Error::Calibration(m) => CliError::Calibration(m),
            wdcusum::Error::Censoring { .. } => CliError::Censoring(err.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

/// Exit code for `detect` runs that end without an alarm.
pub const EXIT_NO_ALARM: i32 = 7;
