use thiserror::Error;

/// Error type shared by every module in the crate.
///
/// The variants mirror the process exit codes of the `commact` binary:
/// assertion failures exit with 1, parse errors with 2, validation-level
/// problems (including oracle and domain errors) with 3 and exhausted
/// budgets with 4.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input text: scenario files, word syntax, fixture names.
    #[error("parse error: {0}")]
    Parse(String),

    /// Structurally well-formed input that violates a documented precondition.
    #[error("validation error: {0}")]
    Validation(String),

    /// Required configuration is missing, e.g. declared difference sets for
    /// an oracle-backed action.
    #[error("configuration error: {0}")]
    Config(String),

    /// A point oracle failed to decode a token or returned inconsistent data.
    #[error("oracle error: {0}")]
    Oracle(String),

    /// The operation is not defined on this input (wrong backend, graph not
    /// median, mismatched components).
    #[error("domain error: {0}")]
    Domain(String),

    /// A configured budget was exhausted before the computation finished.
    #[error("budget exceeded: {0}")]
    Budget(String),

    /// A checked runtime invariant did not hold.
    #[error("assertion failed: {0}")]
    Assertion(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Exit code used by the command line interface for this error class.
    #[must_use]
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Assertion(_) => 1,
            Error::Parse(_) => 2,
            Error::Validation(_) | Error::Config(_) | Error::Oracle(_) | Error::Domain(_) => 3,
            Error::Budget(_) => 4,
        }
    }

    /// Machine-readable class name used in serialized results.
    #[must_use]
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse(_) => "parse",
            Error::Validation(_) => "validation",
            Error::Config(_) => "config",
            Error::Oracle(_) => "oracle",
            Error::Domain(_) => "domain",
            Error::Budget(_) => "budget",
            Error::Assertion(_) => "assertion",
        }
    }
}
