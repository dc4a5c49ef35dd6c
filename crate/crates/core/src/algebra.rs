//! The filtered-algebra contract and the constructions written once against it:
//! Toeplitz compression, projection completion, the Neumann parametrix
//! bootstrap, the Fredholm-witness parametrix and order reduction.
//!
//! An instance works modulo a depth `J`: every element carries `J` retained
//! levels below its order, and "order ≤ order − J" is the computable
//! stand-in for a smoothing remainder.

use std::fmt::{Debug, Display};
use std::ops::{Add, Neg};

use crate::error::{CalcError, Result};
use crate::scalar::{cq_int, Cq};

/// Order labels: integers for the circle, integer pairs for SG.
pub trait OrderLike: Copy + Eq + Debug + Display + Add<Output = Self> + Neg<Output = Self> + Send + Sync {
    fn zero() -> Self;
}

impl OrderLike for i64 {
    fn zero() -> Self {
        0
    }
}

/// Symbolic calculus modulo a finite depth.
pub trait Calculus: Clone + Debug + Send + Sync + Sized {
    type Order: OrderLike;

    fn order(&self) -> Self::Order;
    fn depth(&self) -> usize;
    /// Fibre dimension of the target bundle.
    fn target_dim(&self) -> usize;
    /// Fibre dimension of the source bundle.
    fn source_dim(&self) -> usize;

    fn compose(&self, rhs: &Self) -> Result<Self>;
    fn adjoint(&self) -> Self;
    fn add(&self, rhs: &Self) -> Result<Self>;
    fn scale(&self, c: &Cq) -> Self;

    /// Order-zero identity on a bundle of fibre dimension `dim`, with the
    /// bookkeeping (depth, context) of `self`.
    fn identity_like(&self, dim: usize) -> Self;

    /// Keeps only the first `depth` retained levels.
    fn truncate_depth(&self, depth: usize) -> Self;

    /// Number of leading retained levels whose coefficients are all at most
    /// `tol` in modulus (`tol = 0` means exactly zero). Equal to
    /// `depth()` when the element vanishes at every retained level.
    fn vanishing_levels(&self, tol: f64) -> usize;

    /// Zeroes the first `k` levels; returns the modified element and the
    /// largest discarded coefficient modulus.
    fn discard_levels(&self, k: usize) -> (Self, f64);

    fn sub(&self, rhs: &Self) -> Result<Self> {
        self.add(&rhs.scale(&cq_int(-1, 0)))
    }

    fn is_negligible(&self, tol: f64) -> bool {
        self.vanishing_levels(tol) >= self.depth()
    }
}

fn check_order<C: Calculus>(expected: C::Order, found: C::Order) -> Result<()> {
    if expected != found {
        return Err(CalcError::OrderMismatch {
            expected: expected.to_string(),
            found: found.to_string(),
        });
    }
    Ok(())
}

/// An order-zero element whose idempotency defect vanishes at all retained
/// levels.
#[derive(Debug, Clone)]
pub struct ProjectionHandle<C: Calculus> {
    op: C,
}

impl<C: Calculus> ProjectionHandle<C> {
    pub fn new(op: C) -> Result<Self> {
        check_order::<C>(C::Order::zero(), op.order())?;
        if op.source_dim() != op.target_dim() {
            return Err(CalcError::DimensionMismatch(format!(
                "projection must be square, got {}x{}",
                op.target_dim(),
                op.source_dim()
            )));
        }
        let defect = op.compose(&op)?.sub(&op)?;
        let lev = defect.vanishing_levels(0.0);
        if lev < op.depth() {
            return Err(CalcError::NotIdempotent(format!(
                "P#P - P is nonzero at retained level {lev}"
            )));
        }
        Ok(Self { op })
    }

    pub fn op(&self) -> &C {
        &self.op
    }

    pub fn dim(&self) -> usize {
        self.op.source_dim()
    }

    /// `1 − P`.
    pub fn complement(&self) -> Result<Self> {
        let one = self.op.identity_like(self.dim());
        Ok(Self {
            op: one.sub(&self.op)?,
        })
    }

    pub fn adjoint(&self) -> Result<Self> {
        Self::new(self.op.adjoint())
    }

    pub fn truncate_depth(&self, depth: usize) -> Self {
        Self {
            op: self.op.truncate_depth(depth),
        }
    }
}

/// `A = P₁ A P₀` at all retained levels.
#[derive(Debug, Clone)]
pub struct ToeplitzElement<C: Calculus> {
    inner: C,
    p0: ProjectionHandle<C>,
    p1: ProjectionHandle<C>,
}

impl<C: Calculus> ToeplitzElement<C> {
    /// Wraps an element that already satisfies `(1−P₁)A = 0 = A(1−P₀)`.
    pub fn new(inner: C, p0: ProjectionHandle<C>, p1: ProjectionHandle<C>) -> Result<Self> {
        check_dims(&inner, &p0, &p1)?;
        let left = p1.complement()?.op.compose(&inner)?;
        let right = inner.compose(p0.complement()?.op())?;
        if !left.is_negligible(0.0) || !right.is_negligible(0.0) {
            return Err(CalcError::InvalidInput(
                "element is not compressed by the given projections".into(),
            ));
        }
        Ok(Self { inner, p0, p1 })
    }

    pub fn inner(&self) -> &C {
        &self.inner
    }

    pub fn p0(&self) -> &ProjectionHandle<C> {
        &self.p0
    }

    pub fn p1(&self) -> &ProjectionHandle<C> {
        &self.p1
    }

    pub fn order(&self) -> C::Order {
        self.inner.order()
    }

    pub fn depth(&self) -> usize {
        self.inner.depth()
    }

    /// Element of the adjoint Toeplitz algebra, acting between the ranges of
    /// `P₁*` and `P₀*`.
    pub fn adjoint(&self) -> Result<Self> {
        Ok(Self {
            inner: self.inner.adjoint(),
            p0: self.p1.adjoint()?,
            p1: self.p0.adjoint()?,
        })
    }
}

fn check_dims<C: Calculus>(a: &C, p0: &ProjectionHandle<C>, p1: &ProjectionHandle<C>) -> Result<()> {
    if a.source_dim() != p0.dim() || a.target_dim() != p1.dim() {
        return Err(CalcError::DimensionMismatch(format!(
            "operator is {}x{}, projections act on {} (source) and {} (target)",
            a.target_dim(),
            a.source_dim(),
            p0.dim(),
            p1.dim()
        )));
    }
    Ok(())
}

/// `P₁ A P₀`.
pub fn toeplitz_compress<C: Calculus>(
    a: &C,
    p0: &ProjectionHandle<C>,
    p1: &ProjectionHandle<C>,
) -> Result<ToeplitzElement<C>> {
    check_dims(a, p0, p1)?;
    let inner = p1.op.compose(a)?.compose(&p0.op)?;
    Ok(ToeplitzElement {
        inner,
        p0: p0.clone(),
        p1: p1.clone(),
    })
}

/// True when `x − y` vanishes at every retained level.
pub fn differ_below_depth<C: Calculus>(x: &C, y: &C, tol: f64) -> Result<bool> {
    Ok(x.sub(y)?.is_negligible(tol))
}

/// Outcome of Newton–Schulz projection completion.
#[derive(Debug, Clone)]
pub struct Completion<C: Calculus> {
    pub projection: ProjectionHandle<C>,
    /// Vanishing levels of `p#p − p` before the first and after each
    /// iteration (residual order is the negative of each entry).
    pub residual_levels: Vec<usize>,
}

impl<C: Calculus> Completion<C> {
    pub fn iterations(&self) -> usize {
        self.residual_levels.len() - 1
    }
}

/// Newton–Schulz refinement `p ← 3p² − 2p³` of an element whose
/// principal part is idempotent.
pub fn complete_projection<C: Calculus>(initial: &C) -> Result<Completion<C>> {
    check_order::<C>(C::Order::zero(), initial.order())?;
    let depth = initial.depth();
    let mut p = initial.clone();
    let defect = |p: &C| -> Result<usize> { Ok(p.compose(p)?.sub(p)?.vanishing_levels(0.0)) };
    let mut levels = vec![defect(&p)?];
    if levels[0] == 0 {
        return Err(CalcError::InvalidInput(
            "principal part is not idempotent".into(),
        ));
    }
    let three = cq_int(3, 0);
    let two = cq_int(2, 0);
    // residual order at least doubles per step, so 64 is never reached
    for _ in 0..64 {
        if *levels.last().unwrap() >= depth {
            break;
        }
        let p2 = p.compose(&p)?;
        let p3 = p2.compose(&p)?;
        p = p2.scale(&three).sub(&p3.scale(&two))?;
        levels.push(defect(&p)?);
    }
    Ok(Completion {
        projection: ProjectionHandle::new(p)?,
        residual_levels: levels,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateKind {
    /// Candidates live in the ambient algebra and are compressed first.
    FullAlgebra,
    /// Candidates are already Toeplitz elements `P₀ C P₁`.
    Toeplitz,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapOptions {
    pub depth: usize,
    /// Coefficients up to this modulus count as zero when certifying the
    /// order of a residual. `0.0` demands exact cancellation.
    pub zero_tol: f64,
}

impl Default for BootstrapOptions {
    fn default() -> Self {
        Self {
            depth: 5,
            zero_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParametrixRoute {
    Bootstrap,
    FredholmWitness,
}

/// Two-sided parametrix modulo order `−J`.
#[derive(Debug, Clone)]
pub struct Parametrix<C: Calculus> {
    /// Left parametrix, an element of the reversed Toeplitz algebra.
    pub b: ToeplitzElement<C>,
    /// Right parametrix; agrees with `b` below depth.
    pub right: C,
    /// `B A − P₀`.
    pub left_residual: C,
    /// `A B_R − P₁`.
    pub right_residual: C,
    /// Vanishing levels of the first-stage residual (bootstrap route).
    pub initial_residual_levels: usize,
    pub left_residual_levels: usize,
    pub right_residual_levels: usize,
    pub reconciliation_levels: usize,
    /// Largest coefficient dropped under `zero_tol`.
    pub discarded: f64,
    pub route: ParametrixRoute,
}

impl<C: Calculus> Parametrix<C> {
    pub fn depth(&self) -> usize {
        self.b.depth()
    }

    /// Both residuals and the left/right difference vanish at every
    /// retained level.
    pub fn is_certified(&self) -> bool {
        let d = self.depth();
        self.left_residual_levels >= d && self.right_residual_levels >= d && self.reconciliation_levels >= d
    }
}

fn neumann_sum<C: Calculus>(unit: &C, r: &C, depth: usize) -> Result<C> {
    let mut sum = unit.clone();
    let mut power = unit.clone();
    for _ in 1..depth {
        power = power.compose(r)?;
        sum = sum.add(&power)?;
    }
    Ok(sum)
}

fn certify_first_stage<C: Calculus>(r: C, tol: f64) -> Result<(C, usize, f64)> {
    let exact = r.vanishing_levels(0.0);
    if exact >= 1 {
        return Ok((r, exact, 0.0));
    }
    if r.vanishing_levels(tol) >= 1 {
        let (r, mass) = r.discard_levels(1);
        let lev = r.vanishing_levels(0.0);
        return Ok((r, lev, mass));
    }
    let (_, mass) = r.discard_levels(1);
    Err(CalcError::NotEllipticCertified { magnitude: mass })
}

/// Builds a two-sided parametrix from one-sided inverses modulo order `−1`
/// by truncated Neumann summation `B₀' = P₀ + Σ_{ℓ=1}^{J−1} R₀^ℓ`,
/// `B_L = B₀' B₀`, and symmetrically on the right.
pub fn parametrix_bootstrap<C: Calculus>(
    a: &ToeplitzElement<C>,
    cand_left: &C,
    cand_right: &C,
    kind: CandidateKind,
    opts: BootstrapOptions,
) -> Result<Parametrix<C>> {
    let depth = opts.depth.min(a.depth()).min(cand_left.depth()).min(cand_right.depth());
    let a_el = a.inner.truncate_depth(depth);
    let p0 = a.p0.truncate_depth(depth);
    let p1 = a.p1.truncate_depth(depth);
    let expected = -a_el.order();
    check_order::<C>(expected, cand_left.order())?;
    check_order::<C>(expected, cand_right.order())?;
    for c in [cand_left, cand_right] {
        if c.source_dim() != a_el.target_dim() || c.target_dim() != a_el.source_dim() {
            return Err(CalcError::DimensionMismatch(
                "candidate must map target bundle to source bundle".into(),
            ));
        }
    }
    let (mut b0, mut b1) = (cand_left.truncate_depth(depth), cand_right.truncate_depth(depth));
    if kind == CandidateKind::FullAlgebra {
        b0 = p0.op.compose(&b0)?.compose(&p1.op)?;
        b1 = p0.op.compose(&b1)?.compose(&p1.op)?;
    }
    let r0 = p0.op.sub(&b0.compose(&a_el)?)?;
    let r1 = p1.op.sub(&a_el.compose(&b1)?)?;
    let (r0, lev0, m0) = certify_first_stage(r0, opts.zero_tol)?;
    let (r1, lev1, m1) = certify_first_stage(r1, opts.zero_tol)?;

    let b_left = neumann_sum(&p0.op, &r0, depth)?.compose(&b0)?;
    let b_right = b1.compose(&neumann_sum(&p1.op, &r1, depth)?)?;
    finish(
        &a_el,
        &p0,
        &p1,
        b_left,
        b_right,
        lev0.min(lev1),
        m0.max(m1),
        opts.zero_tol,
        ParametrixRoute::Bootstrap,
    )
}

#[allow(clippy::too_many_arguments)]
fn finish<C: Calculus>(
    a: &C,
    p0: &ProjectionHandle<C>,
    p1: &ProjectionHandle<C>,
    b_left: C,
    b_right: C,
    initial: usize,
    discarded: f64,
    tol: f64,
    route: ParametrixRoute,
) -> Result<Parametrix<C>> {
    let left_residual = b_left.compose(a)?.sub(&p0.op)?;
    let right_residual = a.compose(&b_right)?.sub(&p1.op)?;
    let reconciliation_levels = b_left.sub(&b_right)?.vanishing_levels(tol);
    let left_residual_levels = left_residual.vanishing_levels(tol);
    let right_residual_levels = right_residual.vanishing_levels(tol);
    let b = ToeplitzElement {
        inner: b_left,
        p0: p1.clone(),
        p1: p0.clone(),
    };
    Ok(Parametrix {
        b,
        right: b_right,
        left_residual,
        right_residual,
        initial_residual_levels: initial,
        left_residual_levels,
        right_residual_levels,
        reconciliation_levels,
        discarded,
        route,
    })
}

/// Parametrix provider and ellipticity test of the ambient algebra.
pub trait AmbientSolver<C: Calculus> {
    /// Fails with a witness when the principal symbol of `w` is not
    /// invertible.
    fn check_invertible(&self, w: &C) -> Result<()>;
    /// Parametrix of an elliptic order-zero element.
    fn parametrix(&self, w: &C) -> Result<(C, f64)>;
}

/// Parametrix through the self-adjoint witness `W = A*A + (1−P₀)*(1−P₀)`:
/// with `C W ≡ 1`, `B_L = P₀ C A* P₁`; the right parametrix is the
/// adjoint of the same construction applied to `A*`.
pub fn fredholm_parametrix<C: Calculus>(
    a: &ToeplitzElement<C>,
    solver: &dyn AmbientSolver<C>,
    opts: BootstrapOptions,
) -> Result<Parametrix<C>> {
    check_order::<C>(C::Order::zero(), a.order())?;
    let depth = opts.depth.min(a.depth());
    let a_el = a.inner.truncate_depth(depth);
    let p0 = a.p0.truncate_depth(depth);
    let p1 = a.p1.truncate_depth(depth);
    let a_adj = a_el.adjoint();

    let left = |op: &C, op_adj: &C, src: &ProjectionHandle<C>, tgt: &ProjectionHandle<C>| -> Result<(C, f64)> {
        let q = src.complement()?.op;
        let w = op_adj.compose(op)?.add(&q.adjoint().compose(&q)?)?;
        solver.check_invertible(&w)?;
        let (c, mass) = solver.parametrix(&w)?;
        Ok((src.op.compose(&c)?.compose(op_adj)?.compose(&tgt.op)?, mass))
    };

    let (b_left, m0) = left(&a_el, &a_adj, &p0, &p1)?;
    let p0s = p0.adjoint()?;
    let p1s = p1.adjoint()?;
    let (l_adj, m1) = left(&a_adj, &a_el, &p1s, &p0s)?;
    let b_right = l_adj.adjoint();
    finish(
        &a_el,
        &p0,
        &p1,
        b_left,
        b_right,
        depth,
        m0.max(m1),
        opts.zero_tol,
        ParametrixRoute::FredholmWitness,
    )
}

/// Invertible pairs `(S_t, S_{−t})` on bundles of a given dimension.
pub trait OrderReductions<C: Calculus> {
    fn pair(&self, order: C::Order, dim: usize, template: &C) -> Result<(C, C)>;
}

/// Order-zero element conjugated by order reductions together with the
/// transported projections.
#[derive(Debug, Clone)]
pub struct Reduced<C: Calculus> {
    pub element: ToeplitzElement<C>,
    /// `S¹_{s−μ}`, applied on the target side.
    pub target_reduction: C,
    /// `S⁰_{−s}`, applied on the source side.
    pub source_reduction: C,
}

/// `Ã = S¹_{s−μ} A S⁰_{−s}` with `P̃₀ = S⁰_s P₀ S⁰_{−s}` and
/// `P̃₁ = S¹_{s−μ} P₁ S¹_{μ−s}`.
pub fn reduce_order<C: Calculus>(
    a: &ToeplitzElement<C>,
    s: C::Order,
    reductions: &dyn OrderReductions<C>,
) -> Result<Reduced<C>> {
    let mu = a.order();
    let (s0_pos, s0_neg) = reductions.pair(s, a.p0.dim(), &a.inner)?;
    let (s1_pos, s1_neg) = reductions.pair(s + -mu, a.p1.dim(), &a.inner)?;
    let inner = s1_pos.compose(&a.inner)?.compose(&s0_neg)?;
    let p0 = ProjectionHandle::new(s0_pos.compose(&a.p0.op)?.compose(&s0_neg)?)?;
    let p1 = ProjectionHandle::new(s1_pos.compose(&a.p1.op)?.compose(&s1_neg)?)?;
    Ok(Reduced {
        element: ToeplitzElement::new(inner, p0, p1)?,
        target_reduction: s1_pos,
        source_reduction: s0_neg,
    })
}
