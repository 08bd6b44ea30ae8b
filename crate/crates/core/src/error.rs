use thiserror::Error;

use crate::term::{Position, Symbol, Var};

#[derive(Debug, Error)]
pub enum Error {
    #[error("position {0} does not address a node of the term")]
    InvalidPosition(Position),

    #[error("uninterpreted symbol {0} in an arithmetic context")]
    UninterpretedSymbol(Symbol),

    #[error("free variable {0} in a ground evaluation")]
    FreeVariable(Var),

    #[error("integer overflow while evaluating {0}")]
    Overflow(String),

    #[error("no interpretation assigned to {0}")]
    IncompleteAssignment(Symbol),

    #[error("undeclared SMT symbol `{0}`")]
    UndeclaredSymbol(String),

    #[error("solver could not be started (`{command}`): {source}")]
    SolverSpawn {
        command: String,
        #[source]
        source: std::io::Error,
    },

    #[error("solver protocol error: {0}")]
    SolverProtocol(String),

    #[error("validity of `{0}` could not be determined")]
    Undetermined(String),

    #[error("{line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("rules are not locally sound: {0}")]
    Unsound(String),

    #[error("invalid model file: {0}")]
    Model(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
