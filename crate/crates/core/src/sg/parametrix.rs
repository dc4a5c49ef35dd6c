//! SG parametrices from monomial-type leading parts, SG order reductions
//! and the builtin constant projections.

use crate::algebra::{
    parametrix_bootstrap, BootstrapOptions, Calculus, CandidateKind, OrderReductions, Parametrix, ProjectionHandle,
    ToeplitzElement,
};
use crate::certificate::Certificate;
use crate::error::{CalcError, Result};
use crate::scalar::QMat;

use super::onevar::{deg, Basis};
use super::principal::sg_check_ellipticity;
use super::symbol::{BiOrder, SgSymbol};

pub fn full(dim: usize, depth: usize) -> Result<ProjectionHandle<SgSymbol>> {
    ProjectionHandle::new(SgSymbol::identity(dim, depth))
}

/// Constant-matrix projection; rejects non-idempotent matrices.
pub fn constant(m: QMat, depth: usize) -> Result<ProjectionHandle<SgSymbol>> {
    if m.mul(&m) != m {
        return Err(CalcError::NotIdempotent("constant matrix is not a projection".into()));
    }
    ProjectionHandle::new(SgSymbol::constant(m, depth))
}

/// Coefficient of the single level-0 term, when it is `⟨x⟩^m⟨ξ⟩^μ M`.
fn monomial_leading(a: &SgSymbol) -> Option<QMat> {
    let o = a.order();
    let key = (Basis::even(deg(o.x)), Basis::even(deg(o.xi)));
    let mut lead = a.at_level(0);
    match (lead.next(), lead.next()) {
        (Some((k, m)), None) if *k == key => Some(m.clone()),
        (None, _) => Some(QMat::zeros(a.rows(), a.cols())),
        _ => None,
    }
}

/// Columns of `m` forming a basis of its column space.
fn column_basis(m: &QMat) -> QMat {
    let mut picked: Vec<usize> = Vec::new();
    let mut rank = 0;
    for j in 0..m.cols() {
        let mut trial = picked.clone();
        trial.push(j);
        let sub = QMat::from_fn(m.rows(), trial.len(), |r, c| m.get(r, trial[c]).clone());
        let r = sub.rank();
        if r > rank {
            rank = r;
            picked = trial;
        }
    }
    QMat::from_fn(m.rows(), picked.len(), |r, c| m.get(r, picked[c]).clone())
}

/// `U₀ (L₁ M U₀)^{−1} L₁` with `U₀` spanning `range π₀` and `L₁` spanning the
/// row space of `π₁`: the inverse of `M : range π₀ → range π₁`, extended by
/// zero on `ker π₁`.
pub fn restricted_matrix_inverse(m: &QMat, pi0: &QMat, pi1: &QMat) -> Option<QMat> {
    let u0 = column_basis(pi0);
    let l1 = column_basis(&pi1.adjoint()).adjoint();
    if u0.cols() != l1.rows() {
        return None;
    }
    let core = l1.mul(m).mul(&u0).inverse()?;
    Some(u0.mul(&core).mul(&l1))
}

/// Level-0 part of a projection if it is a constant matrix.
fn constant_part(p: &ProjectionHandle<SgSymbol>) -> Option<QMat> {
    let one = (Basis::even(deg(0)), Basis::even(deg(0)));
    let mut lead = p.op().at_level(0);
    match (lead.next(), lead.next()) {
        (Some((k, m)), None) if *k == one => Some(m.clone()),
        (None, _) => Some(QMat::zeros(p.dim(), p.dim())),
        _ => None,
    }
}

/// `⟨x⟩^{−m}⟨ξ⟩^{−μ}` times the restricted inverse of the leading matrix.
pub fn monomial_candidate(t: &ToeplitzElement<SgSymbol>) -> Result<SgSymbol> {
    let a = t.inner();
    let lead = monomial_leading(a).ok_or_else(|| {
        CalcError::CandidateRequired("leading part is not of the form <x>^m <xi>^mu M".into())
    })?;
    let (pi0, pi1) = match (constant_part(t.p0()), constant_part(t.p1())) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(CalcError::CandidateRequired(
                "projections have non-constant leading parts".into(),
            ))
        }
    };
    let inv = restricted_matrix_inverse(&lead, &pi0, &pi1).ok_or_else(|| {
        CalcError::CandidateRequired("leading matrix is not invertible between the projected ranges".into())
    })?;
    let o = -a.order();
    SgSymbol::monomial(o, a.depth(), Basis::even(deg(o.x)), Basis::even(deg(o.xi)), inv)
}

/// Bootstrap parametrix from the monomial candidate or a supplied one.
pub fn sg_parametrix(
    t: &ToeplitzElement<SgSymbol>,
    candidate: Option<&SgSymbol>,
    opts: BootstrapOptions,
) -> Result<Parametrix<SgSymbol>> {
    let cand = match candidate {
        Some(c) => c.clone(),
        None => monomial_candidate(t)?,
    };
    parametrix_bootstrap(t, &cand, &cand, CandidateKind::FullAlgebra, opts)
}

#[derive(Debug, Clone)]
pub struct SgAnalysis {
    pub certificate: Certificate,
    pub parametrix: Option<Parametrix<SgSymbol>>,
}

/// Ellipticity test followed, on success, by the parametrix construction.
pub fn sg_ellipticity_and_parametrix(
    t: &ToeplitzElement<SgSymbol>,
    x_grid: usize,
    xi_grid: usize,
    cond: f64,
    candidate: Option<&SgSymbol>,
    opts: BootstrapOptions,
) -> Result<SgAnalysis> {
    let certificate = sg_check_ellipticity(t, x_grid, xi_grid, cond)?;
    let parametrix = if certificate.is_elliptic() {
        Some(sg_parametrix(t, candidate, opts)?)
    } else {
        None
    };
    Ok(SgAnalysis {
        certificate,
        parametrix,
    })
}

#[derive(Debug, Clone)]
pub struct SgReduction {
    /// `⟨x⟩^m ⟨ξ⟩^μ I`.
    pub forward: SgSymbol,
    /// Its inverse modulo bi-order `(−J, −J)`.
    pub inverse: SgSymbol,
    /// Vanishing levels of `⟨x⟩^{−m}⟨ξ⟩^{−μ} # R − 1` before the bootstrap.
    pub initial_residual_levels: usize,
    pub parametrix: Parametrix<SgSymbol>,
}

pub fn sg_order_reduction(order: BiOrder, dim: usize, opts: BootstrapOptions) -> Result<SgReduction> {
    let depth = opts.depth;
    let forward = SgSymbol::weight(order, dim, depth);
    let cand = SgSymbol::weight(-order, dim, depth);
    let p = full(dim, depth)?;
    let t = ToeplitzElement::new(forward.clone(), p.clone(), p)?;
    let parametrix = parametrix_bootstrap(&t, &cand, &cand, CandidateKind::FullAlgebra, opts)?;
    Ok(SgReduction {
        forward,
        inverse: parametrix.b.inner().clone(),
        initial_residual_levels: parametrix.initial_residual_levels,
        parametrix,
    })
}

/// The family `⟨x⟩^m⟨ξ⟩^μ`, inverted by bootstrap.
#[derive(Debug, Clone, Copy, Default)]
pub struct SgReductions;

impl OrderReductions<SgSymbol> for SgReductions {
    fn pair(&self, order: BiOrder, dim: usize, template: &SgSymbol) -> Result<(SgSymbol, SgSymbol)> {
        let r = sg_order_reduction(
            order,
            dim,
            BootstrapOptions {
                depth: template.depth(),
                zero_tol: 0.0,
            },
        )?;
        Ok((r.forward, r.inverse))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::toeplitz_compress;
    use crate::scalar::cq_int;

    #[test]
    fn weight_parametrix_is_exact_below_depth() {
        let p = full(1, 5).unwrap();
        let a = SgSymbol::weight(BiOrder::new(1, 1), 1, 5);
        let t = toeplitz_compress(&a, &p, &p).unwrap();
        let par = sg_parametrix(&t, None, BootstrapOptions { depth: 5, zero_tol: 0.0 }).unwrap();
        assert_eq!(par.initial_residual_levels, 1);
        assert!(par.is_certified());
        assert_eq!(par.left_residual.vanishing_levels(0.0), 5);
        assert_eq!(par.right_residual.vanishing_levels(0.0), 5);
    }

    #[test]
    fn zero_block_is_discarded_by_projection() {
        let mut m = QMat::zeros(2, 2);
        m.set(0, 0, cq_int(1, 0));
        let p = constant(m.clone(), 4).unwrap();
        let a = SgSymbol::monomial(BiOrder::new(1, 1), 4, Basis::even(deg(1)), Basis::even(deg(1)), m).unwrap();
        let t = toeplitz_compress(&a, &p, &p).unwrap();
        let an = sg_ellipticity_and_parametrix(&t, 33, 33, 1e8, None, BootstrapOptions { depth: 4, zero_tol: 0.0 })
            .unwrap();
        assert!(an.certificate.is_elliptic());
        assert!(an.parametrix.unwrap().is_certified());
    }

    #[test]
    fn reduction_pair_composes_to_one() {
        let r = sg_order_reduction(BiOrder::new(1, 1), 2, BootstrapOptions { depth: 4, zero_tol: 0.0 }).unwrap();
        assert_eq!(r.initial_residual_levels, 1);
        let one = SgSymbol::identity(2, 4);
        assert!(r.forward.compose(&r.inverse).unwrap().sub(&one).unwrap().is_negligible(0.0));
        assert!(r.inverse.compose(&r.forward).unwrap().sub(&one).unwrap().is_negligible(0.0));
    }

    #[test]
    fn non_monomial_needs_candidate() {
        let p = full(1, 3).unwrap();
        let a = SgSymbol::monomial(BiOrder::new(1, 1), 3, Basis::odd(deg(1)), Basis::even(deg(1)), QMat::identity(1))
            .unwrap();
        let t = toeplitz_compress(&a, &p, &p).unwrap();
        assert!(matches!(
            sg_parametrix(&t, None, BootstrapOptions::default()),
            Err(CalcError::CandidateRequired(_))
        ));
    }
}
