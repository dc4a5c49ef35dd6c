//! Exact Gaussian-rational scalars and small dense matrices over them.
//!
//! All symbolic calculus in this crate runs on `Cq = Complex<BigRational>`, so
//! "coefficient-exact" statements are literal equalities. Conversion to `f64`
//! happens only at the numerical boundary (Galerkin assembly, grid checks).

use std::fmt;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

pub type Q = BigRational;
pub type Cq = Complex<BigRational>;

pub fn q_int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q_frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn cq(re: Q, im: Q) -> Cq {
    Complex::new(re, im)
}

pub fn cq_int(re: i64, im: i64) -> Cq {
    Complex::new(q_int(re), q_int(im))
}

pub fn cq_real(re: Q) -> Cq {
    Complex::new(re, Q::zero())
}

/// `i` as an exact scalar.
pub fn cq_i() -> Cq {
    cq_int(0, 1)
}

/// Exact conversion of a finite float (every `f64` is a dyadic rational).
pub fn q_from_f64(x: f64) -> Q {
    Q::from_float(x).unwrap_or_else(Q::zero)
}

/// Parses `"p/q"`, or a decimal literal with optional exponent, exactly:
/// `"0.1"` is `1/10`, not the nearest float.
pub fn q_parse(text: &str) -> Option<Q> {
    let t = text.trim();
    if let Some((p, q)) = t.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        return (!q.is_zero()).then(|| Q::new(p, q));
    }
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().ok()?),
        None => (t, 0),
    };
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits_ok = |s: &str| s.chars().all(|c| c.is_ascii_digit());
    let (neg, int) = match int.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, int.strip_prefix('+').unwrap_or(int)),
    };
    if (int.is_empty() && frac.is_empty()) || !digits_ok(int) || !digits_ok(frac) {
        return None;
    }
    let n: BigInt = format!("{int}{frac}").parse().ok()?;
    let shift = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut q = if shift >= 0 {
        Q::from_integer(n * num_traits::pow(ten, shift as usize))
    } else {
        Q::new(n, num_traits::pow(ten, (-shift) as usize))
    };
    if neg {
        q = -q;
    }
    Some(q)
}

/// Rounds to the dyadic grid `2^-bits`; used to keep denominators bounded when
/// floating-point data (sampled inverses, irrational weights) enters the
/// exact calculus.
pub fn q_from_f64_rounded(x: f64, bits: i32) -> Q {
    let scale = 2f64.powi(bits);
    let k = (x * scale).round();
    Q::new(
        BigInt::from(k as i128),
        BigInt::from(1i128 << bits),
    )
}

pub fn cq_from_c64(z: Complex64) -> Cq {
    Complex::new(q_from_f64(z.re), q_from_f64(z.im))
}

pub fn cq_from_c64_rounded(z: Complex64, bits: i32) -> Cq {
    Complex::new(q_from_f64_rounded(z.re, bits), q_from_f64_rounded(z.im, bits))
}

pub fn cq_to_c64(z: &Cq) -> Complex64 {
    Complex64::new(
        z.re.to_f64().unwrap_or(f64::NAN),
        z.im.to_f64().unwrap_or(f64::NAN),
    )
}

pub fn cq_abs_f64(z: &Cq) -> f64 {
    cq_to_c64(z).norm()
}

/// `|n|^d` for integer `d`, exact; callers guarantee `n != 0` when `d < 0`.
pub fn q_pow_abs(n: i64, d: i64) -> Q {
    let base = q_int(n.abs());
    if d >= 0 {
        num_traits::pow(base, d as usize)
    } else {
        num_traits::pow(base, (-d) as usize).recip()
    }
}

pub fn q_factorial(n: usize) -> Q {
    let mut acc = BigInt::one();
    for k in 2..=n {
        acc *= BigInt::from(k);
    }
    Q::from_integer(acc)
}

/// Generalised binomial coefficient `binom(a, k)` for rational `a`.
pub fn q_binomial(a: &Q, k: usize) -> Q {
    let mut acc = Q::one();
    for j in 0..k {
        acc = acc * (a - q_int(j as i64)) / q_int(j as i64 + 1);
    }
    acc
}

/// Dense row-major matrix of exact complex rationals.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QMat {
    rows: usize,
    cols: usize,
    data: Vec<Cq>,
}

impl fmt::Debug for QMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QMat{}x{}[", self.rows, self.cols)?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, "; ")?;
            }
            for c in 0..self.cols {
                if c > 0 {
                    write!(f, ", ")?;
                }
                let z = self.get(r, c);
                write!(f, "{}+{}i", z.re, z.im)?;
            }
        }
        write!(f, "]")
    }
}

impl QMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Cq::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Cq::one();
        }
        m
    }

    pub fn scalar(z: Cq) -> Self {
        Self {
            rows: 1,
            cols: 1,
            data: vec![z],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Cq) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_c64(m: &DMatrix<Complex64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |r, c| cq_from_c64(m[(r, c)]))
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

    pub fn get(&self, r: usize, c: usize) -> &Cq {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, z: Cq) {
        self.data[r * self.cols + c] = z;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| z.is_zero())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(cq_abs_f64).fold(0.0, f64::max)
    }

    pub fn add(&self, rhs: &Self) -> Self {
        debug_assert_eq!(self.dims(), rhs.dims());
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn add_assign(&mut self, rhs: &Self) {
        debug_assert_eq!(self.dims(), rhs.dims());
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a = &*a + b;
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        debug_assert_eq!(self.dims(), rhs.dims());
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| -a.clone()).collect(),
        }
    }

    pub fn scale(&self, s: &Cq) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    pub fn scale_q(&self, s: &Q) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a.scale(s.clone())).collect(),
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "QMat::mul dimension mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self.data[i * self.cols + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = &rhs.data[k * rhs.cols + j];
                    if b.is_zero() {
                        continue;
                    }
                    let idx = i * rhs.cols + j;
                    out.data[idx] = &out.data[idx] + a * b;
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r).conj())
    }

    pub fn to_c64(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.rows, self.cols, |r, c| cq_to_c64(self.get(r, c)))
    }

    /// Reduced row echelon form; returns the pivot columns.
    fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let Some(p) = (row..self.rows).find(|&r| !self.get(r, col).is_zero()) else {
                continue;
            };
            if p != row {
                for c in 0..self.cols {
                    self.data.swap(p * self.cols + c, row * self.cols + c);
                }
            }
            let inv = Cq::one() / self.get(row, col).clone();
            for c in 0..self.cols {
                let v = self.get(row, c) * &inv;
                self.set(row, c, v);
            }
            for r in 0..self.rows {
                if r == row {
                    continue;
                }
                let f = self.get(r, col).clone();
                if f.is_zero() {
                    continue;
                }
                for c in 0..self.cols {
                    let v = self.get(r, c) - &f * self.get(row, c);
                    self.set(r, c, v);
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }

    pub fn determinant(&self) -> Cq {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut m = self.clone();
        let mut det = Cq::one();
        for col in 0..n {
            let Some(p) = (col..n).find(|&r| !m.get(r, col).is_zero()) else {
                return Cq::zero();
            };
            if p != col {
                for c in 0..n {
                    m.data.swap(p * n + c, col * n + c);
                }
                det = -det;
            }
            let pivot = m.get(col, col).clone();
            det *= &pivot;
            for r in col + 1..n {
                let f = m.get(r, col) / &pivot;
                if f.is_zero() {
                    continue;
                }
                for c in col..n {
                    let v = m.get(r, c) - &f * m.get(col, c);
                    m.set(r, c, v);
                }
            }
        }
        det
    }

    /// Exact inverse, `None` when singular.
    pub fn inverse(&self) -> Option<Self> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut aug = Self::zeros(n, 2 * n);
        for r in 0..n {
            for c in 0..n {
                aug.set(r, c, self.get(r, c).clone());
            }
            aug.set(r, n + r, Cq::one());
        }
        let pivots = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        Some(Self::from_fn(n, n, |r, c| aug.get(r, n + c).clone()))
    }

    /// Exact Moore–Penrose pseudo-inverse via a full-rank factorisation
    /// `A = F G`: `A⁺ = Gᴴ (G Gᴴ)⁻¹ (Fᴴ F)⁻¹ Fᴴ`.
    pub fn pinv(&self) -> Self {
        let mut e = self.clone();
        let pivots = e.rref();
        let r = pivots.len();
        if r == 0 {
            return Self::zeros(self.cols, self.rows);
        }
        let f = Self::from_fn(self.rows, r, |i, j| self.get(i, pivots[j]).clone());
        let g = Self::from_fn(r, self.cols, |i, j| e.get(i, j).clone());
        let gh = g.adjoint();
        let fh = f.adjoint();
        let ggh_inv = g.mul(&gh).inverse().expect("full row rank");
        let fhf_inv = fh.mul(&f).inverse().expect("full column rank");
        gh.mul(&ggh_inv).mul(&fhf_inv).mul(&fh)
    }

    /// Block-diagonal assembly, used for dimension-stacked operators.
    pub fn block_diag(a: &Self, b: &Self) -> Self {
        let mut out = Self::zeros(a.rows + b.rows, a.cols + b.cols);
        for r in 0..a.rows {
            for c in 0..a.cols {
                out.set(r, c, a.get(r, c).clone());
            }
        }
        for r in 0..b.rows {
            for c in 0..b.cols {
                out.set(a.rows + r, a.cols + c, b.get(r, c).clone());
            }
        }
        out
    }

    pub fn is_hermitian(&self) -> bool {
        self.rows == self.cols && *self == self.adjoint()
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &Cq)> {
        let cols = self.cols;
        self.data
            .iter()
            .enumerate()
            .map(move |(i, z)| (i / cols, i % cols, z))
    }

    /// Sum of absolute values of all entries (as `f64`).
    pub fn l1_norm(&self) -> f64 {
        self.data.iter().map(cq_abs_f64).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimals_and_fractions_exactly() {
        assert_eq!(q_parse("0.1"), Some(q_frac(1, 10)));
        assert_eq!(q_parse("-2.5e-1"), Some(q_frac(-1, 4)));
        assert_eq!(q_parse("3/4"), Some(q_frac(3, 4)));
        assert_eq!(q_parse("12"), Some(q_int(12)));
        assert_eq!(q_parse("1e3"), Some(q_int(1000)));
        assert_eq!(q_parse("1/0"), None);
        assert_eq!(q_parse("x"), None);
        assert_eq!(q_parse("."), None);
    }

    #[test]
    fn inverse_and_determinant_agree() {
        let m = QMat::from_fn(2, 2, |r, c| cq_int((r * 2 + c + 1) as i64, (r as i64) - (c as i64)));
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), QMat::identity(2));
        let det = m.determinant();
        // [[1, 2-i],[3+i, 4]]
        assert_eq!(det, cq_int(4, 0) - cq_int(2, -1) * cq_int(3, 1));
    }

    #[test]
    fn singular_has_no_inverse() {
        let m = QMat::from_fn(2, 2, |_, _| cq_int(1, 0));
        assert!(m.inverse().is_none());
        assert!(m.determinant().is_zero());
        assert_eq!(m.rank(), 1);
    }

    #[test]
    fn pinv_is_moore_penrose() {
        let m = QMat::from_fn(2, 3, |r, c| cq_int((r + c) as i64, c as i64));
        let p = m.pinv();
        assert_eq!(m.mul(&p).mul(&m), m);
        assert_eq!(p.mul(&m).mul(&p), p);
        assert!(m.mul(&p).is_hermitian());
        assert!(p.mul(&m).is_hermitian());
    }

    #[test]
    fn binomial_half() {
        let half = q_frac(1, 2);
        assert_eq!(q_binomial(&half, 2), q_frac(-1, 8));
        assert_eq!(q_binomial(&q_int(-1), 3), q_int(-1));
    }

    #[test]
    fn dyadic_rounding() {
        let q = q_from_f64_rounded(0.1, 20);
        assert!((q.to_f64().unwrap() - 0.1).abs() < 1e-6);
        assert_eq!(q_from_f64(0.5), q_frac(1, 2));
    }
}
