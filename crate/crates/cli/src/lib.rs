//! `osproj`: runs projection scenarios from JSON configs and writes
//! deterministic verification reports.
//!
//! Exit codes: 0 when every invariant passes, 2 for config or precondition
//! errors, 3 for numerical failures.

pub mod commands;
pub mod config;
pub mod report;
pub mod scenarios;

use std::fmt;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Environment variable scaling every tolerance; exploratory runs only.
pub const TOL_SCALE_VAR: &str = "OSPROJ_TOL_SCALE";

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Unreadable or invalid config, or an input violating a precondition.
    Config(String),
    /// A computation failed or produced an invalid result.
    Numeric(String),
}

impl CliError {
    pub fn from_core(e: osproj_core::Error) -> Self {
        if e.is_input_error() {
            Self::Config(e.to_string())
        } else {
            Self::Numeric(e.to_string())
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => EXIT_CONFIG,
            Self::Numeric(_) => EXIT_NUMERIC,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Self::Config(m) | Self::Numeric(m) => m,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.message())
    }
}

impl std::error::Error for CliError {}

/// Reads the tolerance scale from its raw environment value.
pub fn parse_tol_scale(raw: Option<&str>) -> Result<f64, CliError> {
    match raw {
        None => Ok(1.0),
        Some(s) => match s.trim().parse::<f64>() {
            Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
            _ => Err(CliError::Config(format!(
                "{TOL_SCALE_VAR} must be a positive number, got '{s}'"
            ))),
        },
    }
}
