//! Failure classes with stable exit codes: 2 config, 3 no-solution,
//! 4 validation-fail, 5 divergence; anything else exits 1.

use std::fmt;

#[derive(Debug)]
pub enum Failure {
    /// Unreadable, unparsable, or invariant-violating configuration.
    Config(String),
    /// The requested pattern does not exist for these parameters.
    NoSolution(String),
    /// A solver or verdict check failed; the report (already emitted)
    /// carries the details.
    Validation(String),
    /// The time integration blew up.
    Divergence(String),
    /// File-system trouble unrelated to the model.
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::NoSolution(_) => 3,
            Failure::Validation(_) => 4,
            Failure::Divergence(_) => 5,
            Failure::Io(_) => 1,
        }
    }

    pub fn config(err: impl fmt::Display) -> Self {
        Failure::Config(err.to_string())
    }

    pub fn io(context: &str, err: impl fmt::Display) -> Self {
        Failure::Io(format!("{context}: {err}"))
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(msg) => write!(f, "configuration error: {msg}"),
            Failure::NoSolution(msg) => write!(f, "no solution: {msg}"),
            Failure::Validation(msg) => write!(f, "validation failed: {msg}"),
            Failure::Divergence(msg) => write!(f, "simulation diverged: {msg}"),
            Failure::Io(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for Failure {}
