use std::io;

use thiserror::Error;

/// Errors produced by the simulator and its exporters.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration key is missing, malformed or out of range.
    #[error("config error{}: `{key}`: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Config {
        key: String,
        line: Option<usize>,
        message: String,
    },

    /// Rejection sampling could not place a base station under the
    /// minimum-separation constraint.
    #[error("infeasible placement: placed {placed} of {requested} base stations, gave up after {attempts} attempts")]
    InfeasiblePlacement {
        placed: usize,
        requested: usize,
        attempts: usize,
    },

    /// An argument lies outside the domain of a formula.
    #[error("domain error: {0}")]
    Domain(String),

    /// Empirical fading parameters evaluated to a non-positive value.
    #[error("fading parameter `{name}` = {value} is out of range at elevation {elevation_deg:.3} deg")]
    ParameterOutOfRange {
        name: &'static str,
        value: f64,
        elevation_deg: f64,
    },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            line: None,
            message: message.into(),
        }
    }

    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } => 2,
            Error::InfeasiblePlacement { .. } => 3,
            _ => 4,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
