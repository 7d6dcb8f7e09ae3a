use std::fmt;

/// Errors shared by every module of the workbench.
///
/// The split is deliberately coarse: callers mostly need to distinguish
/// "the input was malformed" from "this combination is outside the
/// workbench's exact fragment" from "an enumeration budget ran out".
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// A structural precondition failed: mismatched groups, a Cayley table
    /// that is not a group, a non-stochastic transition matrix, and so on.
    Structural(String),
    /// The request is meaningful but outside the exactly computable
    /// fragment this workbench ships (e.g. characters of an infinite
    /// group, duality for a non-abelian group).
    Unsupported(String),
    /// An enumeration budget was exhausted before the requested precision
    /// was certified. Carries the budget that ran out.
    BudgetExceeded { budget: u64, context: String },
    /// Text input (configs, expressions, serialized elements) failed to
    /// parse. Line and column are 1-based; column 0 means "unknown".
    Parse { line: u32, col: u32, message: String },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Structural(msg) => write!(f, "structural error: {msg}"),
            Error::Unsupported(msg) => write!(f, "unsupported: {msg}"),
            Error::BudgetExceeded { budget, context } => {
                write!(f, "budget of {budget} exhausted while {context}")
            }
            Error::Parse { line, col, message } => {
                write!(f, "parse error at {line}:{col}: {message}")
            }
        }
    }
}

impl std::error::Error for Error {}

impl Error {
    pub fn structural(msg: impl Into<String>) -> Self {
        Error::Structural(msg.into())
    }

    pub fn unsupported(msg: impl Into<String>) -> Self {
        Error::Unsupported(msg.into())
    }

    pub fn parse_at(line: u32, col: u32, message: impl Into<String>) -> Self {
        Error::Parse { line, col, message: message.into() }
    }

    pub fn budget_exceeded(budget: u64, context: impl Into<String>) -> Self {
        Error::BudgetExceeded { budget, context: context.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
