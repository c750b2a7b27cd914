// Copyright 2026 ionsim Contributors
// SPDX-License-Identifier: Apache-2.0

use std::fmt;

/// Failure classes, each with its own exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad scenario file or arguments: exit 2.
    Config(String),
    /// Solver or invariant failure: exit 3.
    Numerical(String),
    /// Reading or writing results: exit 1.
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ionsim_core::Error> for CliError {
    fn from(e: ionsim_core::Error) -> Self {
        use ionsim_core::Error as E;
        match e {
            // Properties of the requested parameters, not of the numerics.
            E::InvalidInput(_) | E::DimensionMismatch { .. } | E::NetHeating { .. } | E::Resonant { .. } | E::Singular { .. } => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
