//! Order reductions `⟨D⟩^μ` and their Toeplitz counterparts `P⟨D⟩^μP`.

use crate::algebra::{
    parametrix_bootstrap, toeplitz_compress, BootstrapOptions, Calculus, CandidateKind, OrderReductions, Parametrix,
    ProjectionHandle, ToeplitzElement,
};
use crate::error::{CalcError, Result};
use crate::lab::spectral::{spectral_inverse, SpectralInverse, SpectralOptions};

use super::operator::CircleOp;
use super::projections::is_orthogonal_at_principal_level;

/// `(⟨D⟩^μ, ⟨D⟩^{−μ})` on a bundle of dimension `dim`.
pub fn order_reduction(mu: i64, dim: usize, depth: usize, exact_modes: usize) -> (CircleOp, CircleOp) {
    (
        CircleOp::japanese(mu, dim, depth, exact_modes),
        CircleOp::japanese(-mu, dim, depth, exact_modes),
    )
}

/// The family `⟨D⟩^t`, sized after the element being reduced.
#[derive(Debug, Clone, Copy, Default)]
pub struct PlainReductions;

impl OrderReductions<CircleOp> for PlainReductions {
    fn pair(&self, order: i64, dim: usize, template: &CircleOp) -> Result<(CircleOp, CircleOp)> {
        Ok(order_reduction(order, dim, template.depth(), template.exact_modes()))
    }
}

#[derive(Debug, Clone)]
pub struct ToeplitzReduction {
    /// `R^μ = P ⟨D⟩^μ P`.
    pub forward: ToeplitzElement<CircleOp>,
    /// Parametrix of `R^μ` seeded with `P ⟨D⟩^{−μ} P`.
    pub parametrix: Parametrix<CircleOp>,
    /// Inverse on the range of `P` (`R^{−μ}`).
    pub inverse: SpectralInverse,
}

/// Toeplitz order reduction on the range of an orthogonal projection `P`.
/// The inverse exists because `P⟨D⟩^μP` is positive on that range.
pub fn toeplitz_order_reduction(
    mu: i64,
    p: &ProjectionHandle<CircleOp>,
    bootstrap: BootstrapOptions,
    spectral: SpectralOptions,
) -> Result<ToeplitzReduction> {
    if !is_orthogonal_at_principal_level(p) {
        return Err(CalcError::PositivityUnavailable(
            "principal symbol of the projection is not Hermitian".into(),
        ));
    }
    let op = p.op();
    let (s, s_inv) = order_reduction(mu, p.dim(), op.depth(), op.exact_modes());
    let forward = toeplitz_compress(&s, p, p)?;
    let cand = p.op().compose(&s_inv)?.compose(p.op())?;
    let parametrix = parametrix_bootstrap(&forward, &cand, &cand, CandidateKind::Toeplitz, bootstrap)?;
    let inverse = spectral_inverse(&forward, &parametrix, spectral)?;
    Ok(ToeplitzReduction {
        forward,
        parametrix,
        inverse,
    })
}
