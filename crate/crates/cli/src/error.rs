use thiserror::Error;
use toeplitz_core::CalcError;

/// Process exit codes.
pub const EXIT_PASS: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_UNRESOLVED: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Calc(#[from] CalcError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema { .. } | CliError::Read { .. } | CliError::Write { .. } => EXIT_INVALID,
            CliError::Calc(e) => calc_exit_code(e),
        }
    }
}

pub fn calc_exit_code(e: &CalcError) -> i32 {
    match e {
        CalcError::DimensionMismatch(_)
        | CalcError::OrderMismatch { .. }
        | CalcError::InvalidInput(_)
        | CalcError::NotIdempotent(_)
        | CalcError::InvalidProjectionSymbol(_)
        | CalcError::WindingUndefined(_)
        | CalcError::ResolutionTooSmall { .. } => EXIT_INVALID,
        CalcError::NotElliptic { .. } | CalcError::RankMismatch { .. } | CalcError::NoTwoSidedInverse { .. } => {
            EXIT_NEGATIVE
        }
        CalcError::NotEllipticCertified { .. }
        | CalcError::NotInvertibleAt { .. }
        | CalcError::PositivityUnavailable(_)
        | CalcError::CandidateRequired(_)
        | CalcError::Numerical(_) => EXIT_UNRESOLVED,
    }
}
