//! Builtin projections and completion of projections from principal data.

use crate::algebra::{complete_projection, Calculus, Completion, ProjectionHandle};
use crate::error::{CalcError, Result};
use crate::scalar::{q_frac, Cq, QMat};

use super::operator::CircleOp;
use super::symbol::{ClassicalSymbol, HomComponent};
use super::trig::TrigPoly;

/// Hardy projection `Π₊ ⊗ I_dim`.
pub fn hardy(dim: usize, depth: usize, exact_modes: usize) -> Result<ProjectionHandle<CircleOp>> {
    ProjectionHandle::new(CircleOp::hardy(dim, depth, exact_modes))
}

/// The identity on a trivial bundle.
pub fn full(dim: usize, depth: usize, exact_modes: usize) -> Result<ProjectionHandle<CircleOp>> {
    ProjectionHandle::new(CircleOp::identity(dim, depth, exact_modes))
}

/// Multiplication by a constant idempotent matrix.
pub fn constant(m: QMat, depth: usize, exact_modes: usize) -> Result<ProjectionHandle<CircleOp>> {
    if m.rows() != m.cols() {
        return Err(CalcError::DimensionMismatch("projection matrix must be square".into()));
    }
    if m.mul(&m) != m {
        return Err(CalcError::NotIdempotent("constant matrix is not idempotent".into()));
    }
    ProjectionHandle::new(CircleOp::multiplication(TrigPoly::constant(m), depth, exact_modes))
}

/// Pointwise symbol `½[[1, e^{−iθ}], [e^{iθ}, 1]]`: the orthogonal
/// projection onto the line spanned by `(e^{−iθ/2}, e^{iθ/2})`.
pub fn twisted_line_symbol() -> TrigPoly {
    let h = Cq::new(q_frac(1, 2), Default::default());
    let mut p = TrigPoly::zero(2, 2);
    let mut c0 = QMat::zeros(2, 2);
    c0.set(0, 0, h.clone());
    c0.set(1, 1, h.clone());
    p.add_term(0, &c0);
    let mut cm = QMat::zeros(2, 2);
    cm.set(0, 1, h.clone());
    p.add_term(-1, &cm);
    let mut cp = QMat::zeros(2, 2);
    cp.set(1, 0, h);
    p.add_term(1, &cp);
    p
}

pub fn twisted_line(depth: usize, exact_modes: usize) -> Result<ProjectionHandle<CircleOp>> {
    ProjectionHandle::new(CircleOp::multiplication(twisted_line_symbol(), depth, exact_modes))
}

/// Principal projection data plus an optional lower-order perturbation,
/// refined by Newton–Schulz until idempotent at every retained level.
pub fn complete_from_principal(
    principal: HomComponent,
    perturbation: Option<&ClassicalSymbol>,
    depth: usize,
    exact_modes: usize,
) -> Result<Completion<CircleOp>> {
    let (r, c) = principal.plus.dims();
    if r != c {
        return Err(CalcError::DimensionMismatch("projection symbol must be square".into()));
    }
    for p in [&principal.plus, &principal.minus] {
        if p.mul(p) != *p {
            return Err(CalcError::InvalidInput(
                "principal projection data is not idempotent".into(),
            ));
        }
    }
    let mut s = ClassicalSymbol::zero(0, r, r, depth);
    *s.component_mut(0) = principal;
    if let Some(e) = perturbation {
        if e.order() != 0 || e.rows() != r || e.cols() != r {
            return Err(CalcError::InvalidInput(
                "perturbation must be an order-0 symbol of the projection's size".into(),
            ));
        }
        if !e.components()[0].is_zero() {
            return Err(CalcError::InvalidInput(
                "perturbation must vanish at principal level".into(),
            ));
        }
        s = s.add(&e.truncate(depth))?;
    }
    complete_projection(&CircleOp::from_symbol(s, exact_modes))
}

/// Principal symbol of a projection is Hermitian on both branches.
pub fn is_orthogonal_at_principal_level(p: &ProjectionHandle<CircleOp>) -> bool {
    let c = p.op().symbol().principal();
    c.plus.adjoint() == c.plus && c.minus.adjoint() == c.minus
}

/// Hardy principal data `(I, 0)`.
pub fn hardy_principal(dim: usize) -> HomComponent {
    HomComponent::new(TrigPoly::identity(dim), TrigPoly::zero(dim, dim))
}

/// `true` when `p` and `q` have the same principal symbol.
pub fn same_principal(p: &ProjectionHandle<CircleOp>, q: &ProjectionHandle<CircleOp>) -> bool {
    p.op().symbol().principal() == q.op().symbol().principal() && p.op().order() == q.op().order()
}
