//! SG symbols on the line as finite sums `Σ b(x) b'(ξ) M` over pairs of
//! basis functions, with exact Gaussian rational matrix coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg};

use num_traits::Zero;

use crate::algebra::{Calculus, OrderLike};
use crate::error::{CalcError, Result};
use crate::scalar::{cq_int, cq_real, q_factorial, Cq, Q, QMat};

use super::onevar::{deg, Basis, Deg, OneVar};

/// Bi-order `(μ, m)`: `μ` in the covariable, `m` in the variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BiOrder {
    pub xi: i64,
    pub x: i64,
}

impl BiOrder {
    pub const fn new(xi: i64, x: i64) -> Self {
        Self { xi, x }
    }
}

impl fmt::Display for BiOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.xi, self.x)
    }
}

impl Add for BiOrder {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.xi + rhs.xi, self.x + rhs.x)
    }
}

impl Neg for BiOrder {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.xi, -self.x)
    }
}

impl OrderLike for BiOrder {
    fn zero() -> Self {
        Self::new(0, 0)
    }
}

/// Basis pair `(x-factor, ξ-factor)`.
pub type Key = (Basis, Basis);

#[derive(Debug, Clone, PartialEq)]
pub struct SgSymbol {
    order: BiOrder,
    depth: usize,
    rows: usize,
    cols: usize,
    terms: BTreeMap<Key, QMat>,
}

fn level_of(order: BiOrder, key: &Key) -> i64 {
    let dx: Deg = deg(order.x) - key.0.degree;
    let dxi: Deg = deg(order.xi) - key.1.degree;
    dx.min(dxi).floor().to_integer()
}

/// `d^α b` for `α = 0..n` as sparse combinations.
fn derivatives(b: Basis, n: usize) -> Vec<BTreeMap<Basis, Q>> {
    let mut out: Vec<BTreeMap<Basis, Q>> = Vec::with_capacity(n);
    let mut cur = BTreeMap::from([(b, Q::from_integer(1.into()))]);
    for _ in 0..n {
        out.push(cur.clone());
        let mut next: BTreeMap<Basis, Q> = BTreeMap::new();
        for (c, q) in &cur {
            for (d, r) in c.derivative() {
                *next.entry(d).or_insert_with(Q::zero) += q * r;
            }
        }
        next.retain(|_, q| !q.is_zero());
        cur = next;
    }
    out
}

/// `(−i)^α / α!`.
fn leibniz_factor(alpha: usize) -> Cq {
    let unit = match alpha % 4 {
        0 => cq_int(1, 0),
        1 => cq_int(0, -1),
        2 => cq_int(-1, 0),
        _ => cq_int(0, 1),
    };
    unit * cq_real(Q::from_integer(1.into()) / q_factorial(alpha))
}

impl SgSymbol {
    pub fn zero(order: BiOrder, rows: usize, cols: usize, depth: usize) -> Self {
        Self {
            order,
            depth,
            rows,
            cols,
            terms: BTreeMap::new(),
        }
    }

    /// `M` times the identity symbol.
    pub fn constant(m: QMat, depth: usize) -> Self {
        let mut s = Self::zero(BiOrder::zero(), m.rows(), m.cols(), depth);
        s.push(&(Basis::even(deg(0)), Basis::even(deg(0))), &m);
        s
    }

    pub fn identity(dim: usize, depth: usize) -> Self {
        Self::constant(QMat::identity(dim), depth)
    }

    /// Single term `b_x(x) b_ξ(ξ) M`.
    pub fn monomial(order: BiOrder, depth: usize, x: Basis, xi: Basis, m: QMat) -> Result<Self> {
        let mut s = Self::zero(order, m.rows(), m.cols(), depth);
        s.add_term(x, xi, &m)?;
        Ok(s)
    }

    /// `p(x) q(ξ) M` for scalar one-variable factors.
    pub fn separable(order: BiOrder, depth: usize, p: &OneVar, q: &OneVar, m: &QMat) -> Result<Self> {
        if p.rows() != 1 || p.cols() != 1 || q.rows() != 1 || q.cols() != 1 {
            return Err(CalcError::InvalidInput("separable factors must be scalar".into()));
        }
        let mut s = Self::zero(order, m.rows(), m.cols(), depth);
        for (bx, cx) in p.terms() {
            for (bxi, cxi) in q.terms() {
                let c = cx.get(0, 0).clone() * cxi.get(0, 0).clone();
                s.add_term(*bx, *bxi, &m.scale(&c))?;
            }
        }
        Ok(s)
    }

    /// `⟨x⟩^m ⟨ξ⟩^μ I`.
    pub fn weight(order: BiOrder, dim: usize, depth: usize) -> Self {
        Self::monomial(
            order,
            depth,
            Basis::even(deg(order.x)),
            Basis::even(deg(order.xi)),
            QMat::identity(dim),
        )
        .expect("degrees equal the order")
    }

    /// Adds `b_x(x) b_ξ(ξ) M`, rejecting degrees above the bi-order.
    pub fn add_term(&mut self, x: Basis, xi: Basis, m: &QMat) -> Result<()> {
        if m.dims() != (self.rows, self.cols) {
            return Err(CalcError::DimensionMismatch(format!(
                "term is {}x{}, symbol is {}x{}",
                m.rows(),
                m.cols(),
                self.rows,
                self.cols
            )));
        }
        if x.degree > deg(self.order.x) || xi.degree > deg(self.order.xi) {
            return Err(CalcError::InvalidInput(format!(
                "term {x} {xi} exceeds bi-order {}",
                self.order
            )));
        }
        self.push(&(x, xi), m);
        Ok(())
    }

    fn push(&mut self, key: &Key, m: &QMat) {
        if level_of(self.order, key) >= self.depth as i64 {
            return;
        }
        let e = self.terms.entry(*key).or_insert_with(|| QMat::zeros(m.rows(), m.cols()));
        e.add_assign(m);
        if e.is_zero() {
            self.terms.remove(key);
        }
    }

    pub fn terms(&self) -> &BTreeMap<Key, QMat> {
        &self.terms
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn level(&self, key: &Key) -> usize {
        level_of(self.order, key).max(0) as usize
    }

    /// Terms at one level.
    pub fn at_level(&self, level: usize) -> impl Iterator<Item = (&Key, &QMat)> {
        self.terms.iter().filter(move |(k, _)| self.level(k) == level)
    }

    /// Reinterprets the symbol at a larger bi-order.
    pub fn lift(&self, order: BiOrder) -> Result<Self> {
        if order.x < self.order.x || order.xi < self.order.xi {
            return Err(CalcError::OrderMismatch {
                expected: format!("at least {}", self.order),
                found: order.to_string(),
            });
        }
        let mut out = Self::zero(order, self.rows, self.cols, self.depth);
        for (k, m) in &self.terms {
            out.push(k, m);
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(QMat::max_abs).fold(0.0, f64::max)
    }

    /// Evaluates the symbol at `(x, ξ)`.
    pub fn eval(&self, x: f64, xi: f64) -> crate::linalg::CMat {
        let mut out = crate::linalg::CMat::zeros(self.rows, self.cols);
        for ((bx, bxi), m) in &self.terms {
            out += m.to_c64() * num_complex::Complex64::new(bx.eval(x) * bxi.eval(xi), 0.0);
        }
        out
    }
}

fn expand_into(out: &mut SgSymbol, m: &QMat, x_parts: &[(Basis, Q)], xi_parts: &[(Basis, Q)], factor: &Cq) {
    let mut acc: BTreeMap<Key, Q> = BTreeMap::new();
    for (bx, qx) in x_parts {
        for (bxi, qxi) in xi_parts {
            *acc.entry((*bx, *bxi)).or_insert_with(Q::zero) += qx * qxi;
        }
    }
    for (k, q) in acc {
        if !q.is_zero() {
            out.push(&k, &m.scale(&(factor.clone() * cq_real(q))));
        }
    }
}

fn products(a: &BTreeMap<Basis, Q>, b: Basis, left: bool) -> Vec<(Basis, Q)> {
    let mut out = Vec::new();
    for (c, q) in a {
        let prods = if left { c.mul(&b) } else { b.mul(c) };
        for (d, r) in prods {
            out.push((d, q * r));
        }
    }
    out
}

impl Calculus for SgSymbol {
    type Order = BiOrder;

    fn order(&self) -> BiOrder {
        self.order
    }

    fn depth(&self) -> usize {
        self.depth
    }

    fn target_dim(&self) -> usize {
        self.rows
    }

    fn source_dim(&self) -> usize {
        self.cols
    }

    /// Leibniz product `Σ_{α<J} (1/α!) ∂_ξ^α a · D_x^α b`.
    fn compose(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(CalcError::DimensionMismatch(format!(
                "cannot compose {}x{} with {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let depth = self.depth.min(rhs.depth);
        let mut out = Self::zero(self.order + rhs.order, self.rows, rhs.cols, depth);
        let mut xi_cache: BTreeMap<Basis, Vec<BTreeMap<Basis, Q>>> = BTreeMap::new();
        let mut x_cache: BTreeMap<Basis, Vec<BTreeMap<Basis, Q>>> = BTreeMap::new();
        for ((ax, axi), ma) in &self.terms {
            let dxi = xi_cache.entry(*axi).or_insert_with(|| derivatives(*axi, depth)).clone();
            for ((bx, bxi), mb) in &rhs.terms {
                let dx = x_cache.entry(*bx).or_insert_with(|| derivatives(*bx, depth));
                let m = ma.mul(mb);
                for alpha in 0..depth {
                    if dxi[alpha].is_empty() || dx[alpha].is_empty() {
                        continue;
                    }
                    let x_parts = products(&dx[alpha], *ax, false);
                    let xi_parts = products(&dxi[alpha], *bxi, true);
                    expand_into(&mut out, &m, &x_parts, &xi_parts, &leibniz_factor(alpha));
                }
            }
        }
        Ok(out)
    }

    /// `Σ_{α<J} (1/α!) ∂_ξ^α D_x^α a^H`.
    fn adjoint(&self) -> Self {
        let depth = self.depth;
        let mut out = Self::zero(self.order, self.cols, self.rows, depth);
        for ((bx, bxi), m) in &self.terms {
            let mh = m.adjoint();
            let dx = derivatives(*bx, depth);
            let dxi = derivatives(*bxi, depth);
            for alpha in 0..depth {
                let x_parts: Vec<_> = dx[alpha].iter().map(|(b, q)| (*b, q.clone())).collect();
                let xi_parts: Vec<_> = dxi[alpha].iter().map(|(b, q)| (*b, q.clone())).collect();
                expand_into(&mut out, &mh, &x_parts, &xi_parts, &leibniz_factor(alpha));
            }
        }
        out
    }

    fn add(&self, rhs: &Self) -> Result<Self> {
        if self.order != rhs.order {
            return Err(CalcError::OrderMismatch {
                expected: self.order.to_string(),
                found: rhs.order.to_string(),
            });
        }
        if (self.rows, self.cols) != (rhs.rows, rhs.cols) {
            return Err(CalcError::DimensionMismatch("cannot add symbols of different sizes".into()));
        }
        let mut out = Self::zero(self.order, self.rows, self.cols, self.depth.min(rhs.depth));
        for (k, m) in self.terms.iter().chain(&rhs.terms) {
            out.push(k, m);
        }
        Ok(out)
    }

    fn scale(&self, c: &Cq) -> Self {
        let mut out = Self::zero(self.order, self.rows, self.cols, self.depth);
        for (k, m) in &self.terms {
            out.push(k, &m.scale(c));
        }
        out
    }

    fn identity_like(&self, dim: usize) -> Self {
        Self::identity(dim, self.depth)
    }

    fn truncate_depth(&self, depth: usize) -> Self {
        let mut out = Self::zero(self.order, self.rows, self.cols, depth.min(self.depth));
        for (k, m) in &self.terms {
            out.push(k, m);
        }
        out
    }

    fn vanishing_levels(&self, tol: f64) -> usize {
        self.terms
            .iter()
            .filter(|(_, m)| m.max_abs() > tol)
            .map(|(k, _)| self.level(k))
            .min()
            .unwrap_or(self.depth)
            .min(self.depth)
    }

    fn discard_levels(&self, k: usize) -> (Self, f64) {
        let mut out = Self::zero(self.order, self.rows, self.cols, self.depth);
        let mut mass = 0.0f64;
        for (key, m) in &self.terms {
            if self.level(key) < k {
                mass = mass.max(m.max_abs());
            } else {
                out.push(key, m);
            }
        }
        (out, mass)
    }
}
