use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::scalar::{cq_int, q_int, Cq, QMat};

/// Matrix-valued trigonometric polynomial `c(θ) = Σ c_n e^{inθ}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TrigPoly {
    rows: usize,
    cols: usize,
    coeffs: BTreeMap<i64, QMat>,
}

impl TrigPoly {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(m: QMat) -> Self {
        Self::monomial(0, m)
    }

    pub fn identity(n: usize) -> Self {
        Self::constant(QMat::identity(n))
    }

    pub fn monomial(mode: i64, m: QMat) -> Self {
        let mut p = Self::zero(m.rows(), m.cols());
        p.insert(mode, m);
        p
    }

    /// Scalar polynomial from `(mode, coefficient)` pairs.
    pub fn scalar(terms: &[(i64, Cq)]) -> Self {
        let mut p = Self::zero(1, 1);
        for (n, c) in terms {
            p.add_term(*n, &QMat::scalar(c.clone()));
        }
        p
    }

    pub fn from_coeffs(rows: usize, cols: usize, coeffs: impl IntoIterator<Item = (i64, QMat)>) -> Self {
        let mut p = Self::zero(rows, cols);
        for (n, c) in coeffs {
            assert_eq!(c.dims(), (rows, cols), "coefficient dimension mismatch");
            p.add_term(n, &c);
        }
        p
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn coeffs(&self) -> &BTreeMap<i64, QMat> {
        &self.coeffs
    }

    pub fn coeff(&self, n: i64) -> Option<&QMat> {
        self.coeffs.get(&n)
    }

    fn insert(&mut self, n: i64, m: QMat) {
        if m.is_zero() {
            self.coeffs.remove(&n);
        } else {
            self.coeffs.insert(n, m);
        }
    }

    pub fn add_term(&mut self, n: i64, m: &QMat) {
        let v = match self.coeffs.get(&n) {
            Some(old) => old.add(m),
            None => m.clone(),
        };
        self.insert(n, v);
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Largest `|n|` with a nonzero coefficient.
    pub fn bandwidth(&self) -> usize {
        self.coeffs.keys().map(|n| n.unsigned_abs() as usize).max().unwrap_or(0)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().map(QMat::max_abs).fold(0.0, f64::max)
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.dims(), rhs.dims(), "TrigPoly::add dimension mismatch");
        let mut out = self.clone();
        for (n, c) in &rhs.coeffs {
            out.add_term(*n, c);
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.scale(&cq_int(-1, 0)))
    }

    pub fn scale(&self, s: &Cq) -> Self {
        let mut out = Self::zero(self.rows, self.cols);
        if s.is_zero() {
            return out;
        }
        for (n, c) in &self.coeffs {
            out.insert(*n, c.scale(s));
        }
        out
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "TrigPoly::mul dimension mismatch");
        let mut out = Self::zero(self.rows, rhs.cols);
        for (n, a) in &self.coeffs {
            for (k, b) in &rhs.coeffs {
                out.add_term(n + k, &a.mul(b));
            }
        }
        out
    }

    /// `D_θ^α` with `D_θ = −i ∂_θ`: the coefficient of `e^{inθ}` is
    /// multiplied by `n^α`.
    pub fn d_theta_pow(&self, alpha: u32) -> Self {
        if alpha == 0 {
            return self.clone();
        }
        let mut out = Self::zero(self.rows, self.cols);
        for (n, c) in &self.coeffs {
            let f = num_traits::pow(q_int(*n), alpha as usize);
            out.insert(*n, c.scale_q(&f));
        }
        out
    }

    /// Pointwise conjugate transpose: `c(θ)ᴴ = Σ c_{−n}ᴴ e^{inθ}`.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero(self.cols, self.rows);
        for (n, c) in &self.coeffs {
            out.insert(-n, c.adjoint());
        }
        out
    }

    pub fn eval(&self, theta: f64) -> DMatrix<Complex64> {
        let mut out = DMatrix::zeros(self.rows, self.cols);
        for (n, c) in &self.coeffs {
            let e = Complex64::from_polar(1.0, *n as f64 * theta);
            out += c.to_c64() * e;
        }
        out
    }

    /// Scalar entry `(r, c)` as a 1×1 polynomial.
    pub fn entry(&self, r: usize, c: usize) -> Self {
        let mut out = Self::zero(1, 1);
        for (n, m) in &self.coeffs {
            out.insert(*n, QMat::scalar(m.get(r, c).clone()));
        }
        out
    }

    pub fn from_entries(rows: usize, cols: usize, entries: &[Vec<TrigPoly>]) -> Self {
        let mut out = Self::zero(rows, cols);
        for (r, row) in entries.iter().enumerate() {
            for (c, e) in row.iter().enumerate() {
                for (n, v) in &e.coeffs {
                    let mut m = QMat::zeros(rows, cols);
                    m.set(r, c, v.get(0, 0).clone());
                    out.add_term(*n, &m);
                }
            }
        }
        out
    }

    /// Determinant of a square polynomial matrix (cofactor expansion; the
    /// fibre dimensions in use are small).
    pub fn det(&self) -> TrigPoly {
        assert_eq!(self.rows, self.cols);
        let entries: Vec<Vec<TrigPoly>> = (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self.entry(r, c)).collect())
            .collect();
        det_entries(&entries)
    }

    /// Classical adjugate: `adj(c) c = det(c) I`.
    pub fn adjugate(&self) -> TrigPoly {
        let n = self.rows;
        assert_eq!(n, self.cols);
        if n == 1 {
            return TrigPoly::identity(1);
        }
        let entries: Vec<Vec<TrigPoly>> = (0..n)
            .map(|r| (0..n).map(|c| self.entry(r, c)).collect())
            .collect();
        let mut adj = vec![vec![TrigPoly::zero(1, 1); n]; n];
        for (i, row) in adj.iter_mut().enumerate() {
            for (j, slot) in row.iter_mut().enumerate() {
                // adj[i][j] = (−1)^{i+j} minor(j, i)
                let minor: Vec<Vec<TrigPoly>> = (0..n)
                    .filter(|&r| r != j)
                    .map(|r| (0..n).filter(|&c| c != i).map(|c| entries[r][c].clone()).collect())
                    .collect();
                let d = det_entries(&minor);
                *slot = if (i + j) % 2 == 0 { d } else { d.scale(&cq_int(-1, 0)) };
            }
        }
        TrigPoly::from_entries(n, n, &adj)
    }

    /// `Some((k, c))` when the 1×1 polynomial is `c e^{ikθ}`.
    pub fn as_scalar_monomial(&self) -> Option<(i64, Cq)> {
        if self.rows != 1 || self.cols != 1 || self.coeffs.len() != 1 {
            return None;
        }
        let (n, c) = self.coeffs.iter().next().unwrap();
        Some((*n, c.get(0, 0).clone()))
    }

    /// Exact inverse when the determinant is a monomial `c e^{ikθ}`.
    pub fn exact_inverse(&self) -> Option<TrigPoly> {
        if self.rows != self.cols {
            return None;
        }
        let (k, c) = self.det().as_scalar_monomial()?;
        let s = Cq::one() / c;
        let mut adj = self.adjugate();
        let mut out = TrigPoly::zero(self.rows, self.cols);
        for (n, m) in std::mem::take(&mut adj.coeffs) {
            out.insert(n - k, m.scale(&s));
        }
        Some(out)
    }

    /// Block-diagonal assembly `diag(a, b)`.
    pub fn block_diag(a: &Self, b: &Self) -> Self {
        let mut out = Self::zero(a.rows + b.rows, a.cols + b.cols);
        let zero_a = QMat::zeros(a.rows, a.cols);
        let zero_b = QMat::zeros(b.rows, b.cols);
        let modes: std::collections::BTreeSet<i64> =
            a.coeffs.keys().chain(b.coeffs.keys()).copied().collect();
        for n in modes {
            let ma = a.coeffs.get(&n).unwrap_or(&zero_a);
            let mb = b.coeffs.get(&n).unwrap_or(&zero_b);
            out.insert(n, QMat::block_diag(ma, mb));
        }
        out
    }
}

fn det_entries(m: &[Vec<TrigPoly>]) -> TrigPoly {
    let n = m.len();
    match n {
        0 => TrigPoly::identity(1),
        1 => m[0][0].clone(),
        2 => m[0][0].mul(&m[1][1]).sub(&m[0][1].mul(&m[1][0])),
        _ => {
            let mut acc = TrigPoly::zero(1, 1);
            for c in 0..n {
                let minor: Vec<Vec<TrigPoly>> = (1..n)
                    .map(|r| (0..n).filter(|&k| k != c).map(|k| m[r][k].clone()).collect())
                    .collect();
                let term = m[0][c].mul(&det_entries(&minor));
                acc = if c % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
            }
            acc
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::q_frac;

    fn e(k: i64) -> TrigPoly {
        TrigPoly::scalar(&[(k, cq_int(1, 0))])
    }

    #[test]
    fn product_adds_modes() {
        let p = e(1).add(&e(-2));
        let q = e(2);
        let r = p.mul(&q);
        assert_eq!(r, e(3).add(&e(0)));
        assert_eq!(r.bandwidth(), 3);
    }

    #[test]
    fn d_theta_multiplies_by_mode() {
        let p = e(3).scale(&cq_int(2, 0));
        assert_eq!(p.d_theta_pow(2), e(3).scale(&cq_int(18, 0)));
    }

    #[test]
    fn adjoint_conjugates_pointwise() {
        let p = TrigPoly::scalar(&[(1, cq_int(2, 1))]);
        let a = p.adjoint();
        assert_eq!(a, TrigPoly::scalar(&[(-1, cq_int(2, -1))]));
        let v = p.eval(0.3);
        let w = a.eval(0.3);
        assert!((v[(0, 0)].conj() - w[(0, 0)]).norm() < 1e-14);
    }

    #[test]
    fn unimodular_matrix_inverts_exactly() {
        // [[1, e^{iθ}], [0, 1]] · e^{2iθ}/2
        let m = TrigPoly::from_entries(
            2,
            2,
            &[vec![e(0), e(1)], vec![TrigPoly::zero(1, 1), e(0)]],
        )
        .mul(&TrigPoly::scalar(&[(0, crate::scalar::cq_real(q_frac(1, 2)))]).mul(&e(2)).kron_identity(2));
        let inv = m.exact_inverse().expect("monomial determinant");
        assert_eq!(m.mul(&inv), TrigPoly::identity(2));
        assert_eq!(inv.mul(&m), TrigPoly::identity(2));
    }

    #[test]
    fn non_monomial_determinant_has_no_exact_inverse() {
        let f = TrigPoly::scalar(&[(0, cq_int(2, 0)), (1, cq_int(1, 0))]);
        assert!(f.exact_inverse().is_none());
    }

    impl TrigPoly {
        fn kron_identity(&self, n: usize) -> TrigPoly {
            let mut out = TrigPoly::zero(n, n);
            for (k, c) in &self.coeffs {
                out.insert(*k, QMat::identity(n).scale(c.get(0, 0)));
            }
            out
        }
    }
}
