//! Exit-code carrying errors with machine-readable emission.
//!
//! Exit codes: 0 success (and agreement), 1 bad input, 2 computation error,
//! 3 disagreement or verification failure, 4 epsilon unreachable at the term
//! cap, 5 enumeration blowup with partial output.

use serde::Serialize;
use std::fmt::Display;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_COMPUTATION: i32 = 2;
pub const EXIT_DISAGREEMENT: i32 = 3;
pub const EXIT_EPSILON: i32 = 4;
pub const EXIT_BLOWUP: i32 = 5;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
}

#[derive(Serialize)]
struct ErrorJson<'a> {
    error: ErrorBody<'a>,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    message: &'a str,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> CliError {
        CliError {
            code: EXIT_INPUT,
            kind: "input",
            message: message.into(),
        }
    }

    pub fn input_from(err: impl Display) -> CliError {
        CliError::input(err.to_string())
    }

    pub fn computation(message: impl Into<String>) -> CliError {
        CliError {
            code: EXIT_COMPUTATION,
            kind: "computation",
            message: message.into(),
        }
    }

    pub fn computation_from(err: impl Display) -> CliError {
        CliError::computation(err.to_string())
    }

    pub fn epsilon_unreachable(err: impl Display) -> CliError {
        CliError {
            code: EXIT_EPSILON,
            kind: "epsilon-unreachable",
            message: err.to_string(),
        }
    }

    /// Writes the JSON error object to standard error.
    pub fn emit(&self) {
        let body = ErrorJson {
            error: ErrorBody {
                kind: self.kind,
                message: &self.message,
            },
        };
        eprintln!(
            "{}",
            serde_json::to_string(&body).unwrap_or_else(|_| self.message.clone())
        );
    }
}
