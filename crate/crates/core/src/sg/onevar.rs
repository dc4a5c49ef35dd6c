//! One-variable classical functions spanned by `⟨x⟩^r` and `x⟨x⟩^{r−1}`.
//!
//! The family is closed under products and derivatives:
//! `b_{r,1} b_{s,1} = b_{r+s,0} − b_{r+s−2,0}`,
//! `∂ b_{r,0} = r b_{r−1,1}` and `∂ b_{r,1} = r b_{r−1,0} − (r−1) b_{r−3,0}`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::{One, Zero};

use crate::error::{Branch, CalcError, Result};
use crate::linalg::CMat;
use crate::scalar::{Cq, Q, QMat};

pub type Deg = Ratio<i64>;

pub fn deg(n: i64) -> Deg {
    Ratio::from_integer(n)
}

pub fn deg_to_q(d: Deg) -> Q {
    Q::new(BigInt::from(*d.numer()), BigInt::from(*d.denom()))
}

pub fn deg_to_f64(d: Deg) -> f64 {
    *d.numer() as f64 / *d.denom() as f64
}

/// `b_{r,0} = ⟨x⟩^r` (even) or `b_{r,1} = x⟨x⟩^{r−1}` (odd).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Basis {
    pub degree: Deg,
    pub odd: bool,
}

impl Basis {
    pub fn even(r: Deg) -> Self {
        Self { degree: r, odd: false }
    }

    pub fn odd(r: Deg) -> Self {
        Self { degree: r, odd: true }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let r = deg_to_f64(self.degree);
        let w = 1.0 + x * x;
        if self.odd {
            x * w.powf((r - 1.0) / 2.0)
        } else {
            w.powf(r / 2.0)
        }
    }

    /// Limit of `b(x)/|x|^r` as `x → ±∞`.
    pub fn branch_value(&self, b: Branch) -> i64 {
        if self.odd {
            b.sign()
        } else {
            1
        }
    }

    pub fn mul(&self, rhs: &Basis) -> Vec<(Basis, Q)> {
        let r = self.degree + rhs.degree;
        match (self.odd, rhs.odd) {
            (false, false) => vec![(Basis::even(r), Q::one())],
            (true, true) => vec![(Basis::even(r), Q::one()), (Basis::even(r - 2), -Q::one())],
            _ => vec![(Basis::odd(r), Q::one())],
        }
    }

    pub fn derivative(&self) -> Vec<(Basis, Q)> {
        let r = self.degree;
        let rq = deg_to_q(r);
        if self.odd {
            vec![
                (Basis::even(r - 1), rq.clone()),
                (Basis::even(r - 3), Q::one() - rq),
            ]
        } else {
            vec![(Basis::odd(r - 1), rq)]
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.odd {
            write!(f, "b[{},1]", self.degree)
        } else {
            write!(f, "b[{},0]", self.degree)
        }
    }
}

/// A finite combination `Σ c_b b(x)` with matrix coefficients, kept without
/// zero terms so that equality is coefficient equality.
#[derive(Debug, Clone, PartialEq)]
pub struct OneVar {
    rows: usize,
    cols: usize,
    terms: BTreeMap<Basis, QMat>,
}

impl OneVar {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(m: QMat) -> Self {
        Self::zero(m.rows(), m.cols()).with(Basis::even(deg(0)), m)
    }

    /// Scalar combination of basis functions.
    pub fn scalar(terms: &[(Basis, Cq)]) -> Self {
        let mut out = Self::zero(1, 1);
        for (b, c) in terms {
            out.add_term(*b, &QMat::scalar(c.clone()));
        }
        out
    }

    pub fn with(mut self, b: Basis, m: QMat) -> Self {
        self.add_term(b, &m);
        self
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn terms(&self) -> &BTreeMap<Basis, QMat> {
        &self.terms
    }

    pub fn coefficient(&self, b: &Basis) -> Option<&QMat> {
        self.terms.get(b)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, b: Basis, m: &QMat) {
        debug_assert_eq!(m.dims(), (self.rows, self.cols));
        let e = self.terms.entry(b).or_insert_with(|| QMat::zeros(m.rows(), m.cols()));
        e.add_assign(m);
        if e.is_zero() {
            self.terms.remove(&b);
        }
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        if (self.rows, self.cols) != (rhs.rows, rhs.cols) {
            return Err(CalcError::DimensionMismatch("one-variable sum".into()));
        }
        let mut out = self.clone();
        for (b, m) in &rhs.terms {
            out.add_term(*b, m);
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Cq) -> Self {
        let mut out = Self::zero(self.rows, self.cols);
        for (b, m) in &self.terms {
            out.add_term(*b, &m.scale(c));
        }
        out
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(CalcError::DimensionMismatch("one-variable product".into()));
        }
        let mut out = Self::zero(self.rows, rhs.cols);
        for (ba, ma) in &self.terms {
            for (bb, mb) in &rhs.terms {
                let m = ma.mul(mb);
                for (b, q) in ba.mul(bb) {
                    out.add_term(b, &m.scale_q(&q));
                }
            }
        }
        Ok(out)
    }

    pub fn derivative(&self) -> Self {
        let mut out = Self::zero(self.rows, self.cols);
        for (b, m) in &self.terms {
            for (d, q) in b.derivative() {
                if !q.is_zero() {
                    out.add_term(d, &m.scale_q(&q));
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero(self.cols, self.rows);
        for (b, m) in &self.terms {
            out.add_term(*b, &m.adjoint());
        }
        out
    }

    /// Largest degree carrying a nonzero coefficient.
    pub fn top_degree(&self) -> Option<Deg> {
        self.terms.keys().map(|b| b.degree).max()
    }

    /// Limit of `f(x)/|x|^d` as `x → ±∞` (zero when `d` exceeds every degree).
    pub fn branch_value(&self, d: Deg, branch: Branch) -> QMat {
        let mut out = QMat::zeros(self.rows, self.cols);
        for (b, m) in self.terms.iter().filter(|(b, _)| b.degree == d) {
            if b.branch_value(branch) == 1 {
                out.add_assign(m);
            } else {
                out.add_assign(&m.neg());
            }
        }
        out
    }

    pub fn eval(&self, x: f64) -> CMat {
        let mut out = CMat::zeros(self.rows, self.cols);
        for (b, m) in &self.terms {
            out += m.to_c64() * Complex64::new(b.eval(x), 0.0);
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(QMat::max_abs).fold(0.0, f64::max)
    }
}
