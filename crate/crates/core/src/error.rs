use num_bigint::BigUint;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("base mismatch: {left} vs {right}")]
    BaseMismatch { left: u32, right: u32 },

    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },

    /// phi/psi evaluation needs a complete factorization.
    #[error("unfactored input: cofactor {cofactor} of {n} could not be factored")]
    UnfactoredInput { n: BigUint, cofactor: BigUint },

    #[error("insufficient data in {table}: {detail}")]
    InsufficientData { table: String, detail: String },

    #[error("table {table}, line {line}: {message}")]
    Table {
        table: String,
        line: usize,
        message: String,
    },

    #[error("iteration cap of {0} elements exceeded")]
    IterationCap(usize),

    #[error("candidate element {0} is not a member of the set")]
    NotAMember(BigUint),

    #[error("membership of {value} is undecided: {reason}")]
    Undecided { value: BigUint, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn parse(position: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            position,
            message: message.into(),
        }
    }
}
