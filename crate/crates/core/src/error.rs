//! Error type shared by every module in the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes exposed by the library.
///
/// The CLI maps these onto exit codes and greppable prefixes: input and
/// validation problems exit 1 (`E_PARSE` / `E_VALIDATE`), computational
/// failures exit 2 (`E_NOSIGN` / `E_NOCONV`).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A value violated an operation precondition or a type invariant.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Malformed input text (CSV, JSON, flag syntax).
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A fixture lookup found no matching record.
    #[error("not found: {0}")]
    NotFound(String),

    /// Arithmetic attempted across two different currencies.
    #[error("currency mismatch: {left} vs {right}")]
    CurrencyMismatch { left: String, right: String },

    /// A root-finding bracket whose endpoints do not straddle a sign change.
    #[error("no sign change: difference has the same sign at both bracket endpoints")]
    NoSignChange,

    /// An iterative method hit its iteration cap without meeting tolerance.
    #[error("no convergence after {iterations} iterations")]
    NoConvergence { iterations: usize },

    /// An egalitarian optimum was requested on a frontier that never
    /// crosses the equal-utility line.
    #[error("no crossing: frontier lies entirely on one side of the u_a = u_b line")]
    NoCrossing,
}

impl Error {
    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidParameter(message.into())
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
