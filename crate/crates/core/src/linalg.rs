//! Dense complex helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;

/// Singular values in descending order.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Spectral norm (largest singular value).
pub fn norm2(m: &CMat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Orthonormal basis of the span of the left singular vectors whose
/// singular value exceeds `level`.
pub fn range_basis(m: &CMat, level: f64) -> CMat {
    if m.nrows() == 0 || m.ncols() == 0 {
        return CMat::zeros(m.nrows(), 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let mut idx: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > level)
        .collect();
    idx.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let cols: Vec<DVector<Complex64>> = idx.iter().map(|&i| u.column(i).into_owned()).collect();
    if cols.is_empty() {
        CMat::zeros(m.nrows(), 0)
    } else {
        CMat::from_columns(&cols)
    }
}

/// `true` when every off-diagonal entry is zero and diagonal entries are
/// exactly 0 or 1.
pub fn is_diagonal_01(m: &CMat) -> bool {
    m.is_square()
        && m.iter().enumerate().all(|(k, z)| {
            let (r, c) = (k % m.nrows(), k / m.nrows());
            if r == c {
                (z.re == 0.0 || z.re == 1.0) && z.im == 0.0
            } else {
                *z == Complex64::default()
            }
        })
}

/// Largest entry modulus of `m − mᴴ`.
pub fn hermitian_defect(m: &CMat) -> f64 {
    (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Radius `r` such that every eigenvalue of the square matrix `m` lies
/// within `r` of `0` or `1`, from `|λ(λ − 1)| ≤ ‖m² − m‖₂`. `None` when the
/// defect is too large to separate the two discs (`‖m² − m‖₂ ≥ 1/4`).
pub fn idempotent_eigen_radius(m: &CMat) -> Option<f64> {
    let eps = norm2(&(m * m - m));
    // d(1 − d) ≤ ε for the distance d ≤ 1/2 to the nearer point
    (eps < 0.25).then(|| (1.0 - (1.0 - 4.0 * eps).sqrt()) / 2.0)
}
