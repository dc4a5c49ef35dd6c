//! Ellipticity verdicts shared by both calculi.

use crate::error::{CalcError, Result, Witness};

/// Outcome of a grid test.
#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Elliptic,
    NotElliptic { witness: Witness },
    RankMismatch { source_rank: usize, target_rank: usize, witness: Witness },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub verdict: Verdict,
    /// Smallest singular value of the restricted symbol over the grid.
    pub min_singular_value: f64,
    /// Sample point where the minimum is attained.
    pub argmin: Option<Witness>,
    pub grid: usize,
    pub cond: f64,
}

impl Certificate {
    pub fn is_elliptic(&self) -> bool {
        self.verdict == Verdict::Elliptic
    }

    /// The verdict as an error, for callers that need a hard failure.
    pub fn into_result(self) -> Result<Self> {
        match &self.verdict {
            Verdict::Elliptic => Ok(self),
            Verdict::NotElliptic { witness } => Err(CalcError::NotElliptic {
                witness: witness.clone(),
            }),
            Verdict::RankMismatch {
                source_rank,
                target_rank,
                witness,
            } => Err(CalcError::RankMismatch {
                source_rank: *source_rank,
                target_rank: *target_rank,
                witness: witness.clone(),
            }),
        }
    }
}
