use std::fmt;

use thiserror::Error;

/// Branch of a one-dimensional cosphere (`ξ > 0` or `ξ < 0`, resp. `x → ±∞`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub const BOTH: [Branch; 2] = [Branch::Plus, Branch::Minus];

    pub fn sign(self) -> i64 {
        match self {
            Branch::Plus => 1,
            Branch::Minus => -1,
        }
    }

    pub fn of(n: i64) -> Branch {
        if n < 0 {
            Branch::Minus
        } else {
            Branch::Plus
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Branch::Plus => write!(f, "+"),
            Branch::Minus => write!(f, "-"),
        }
    }
}

/// Where a symbol fails to be invertible.
#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    /// Circle: co-direction branch and angle.
    Circle { branch: Branch, theta: f64 },
    /// SG ξ-principal symbol at `(x, ±∞·ξ)`.
    SgInterior { xi_branch: Branch, x: f64 },
    /// SG x-principal symbol at `(±∞·x, ξ)`.
    SgExit { x_branch: Branch, xi: f64 },
    /// SG corner symbol.
    SgCorner { x_branch: Branch, xi_branch: Branch },
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Circle { branch, theta } => write!(f, "branch {branch}, theta = {theta}"),
            Witness::SgInterior { xi_branch, x } => write!(f, "xi-branch {xi_branch}, x = {x}"),
            Witness::SgExit { x_branch, xi } => write!(f, "x-branch {x_branch}, xi = {xi}"),
            Witness::SgCorner { x_branch, xi_branch } => {
                write!(f, "corner (x {x_branch}, xi {xi_branch})")
            }
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum CalcError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("order mismatch: expected {expected}, found {found}")]
    OrderMismatch { expected: String, found: String },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("not elliptic-certified: candidate residual has order 0 (max coefficient {magnitude:e})")]
    NotEllipticCertified { magnitude: f64 },
    #[error("not elliptic (restricted symbol not bijective) at {witness}")]
    NotElliptic { witness: Witness },
    #[error("restricted ranks differ ({source_rank} -> {target_rank}) at {witness}")]
    RankMismatch {
        source_rank: usize,
        target_rank: usize,
        witness: Witness,
    },
    #[error("not idempotent: {0}")]
    NotIdempotent(String),
    #[error("invalid projection symbol: {0}")]
    InvalidProjectionSymbol(String),
    #[error("not invertible at resolution M = {modes}")]
    NotInvertibleAt { modes: usize },
    #[error("no two-sided inverse exists (kernel {kernel}, cokernel {cokernel})")]
    NoTwoSidedInverse { kernel: usize, cokernel: usize },
    #[error("positivity argument unavailable: {0}")]
    PositivityUnavailable(String),
    #[error("candidate required: {0}")]
    CandidateRequired(String),
    #[error("winding undefined: {0}")]
    WindingUndefined(String),
    #[error("resolution M = {modes} is below the bandwidth {bandwidth}")]
    ResolutionTooSmall { modes: usize, bandwidth: usize },
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, CalcError>;
