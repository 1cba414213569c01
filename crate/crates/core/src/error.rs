use thiserror::Error;

use crate::grid::Cell;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// Malformed map text, scenario or solution file.
    #[error("format error: {0}")]
    Format(String),

    /// A cell that must be free and in bounds is not.
    #[error("cell {0} is an obstacle or out of bounds")]
    Domain(Cell),

    #[error("{to} is unreachable from {from}")]
    Unreachable { from: Cell, to: Cell },

    /// Constraints (or the horizon cap) leave no feasible plan.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// A configured search budget (expansions, states or wall time) ran out.
    #[error("budget exhausted: {0}")]
    Budget(String),

    /// A caller broke an operation's precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("ambiguous implicit assignment at {cell}: tasks {first} and {second} start there")]
    Ambiguity { cell: Cell, first: usize, second: usize },

    #[error("scenario generation failed: {0}")]
    Generation(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Infeasibility and budget exhaustion are "no answer" outcomes rather
    /// than caller mistakes.
    pub fn is_no_solution(&self) -> bool {
        matches!(
            self,
            Error::Infeasible(_) | Error::Budget(_) | Error::Unreachable { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
