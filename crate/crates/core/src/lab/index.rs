//! Finite-section Fredholm data of Toeplitz elements on the circle.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::algebra::{Calculus, ProjectionHandle, ToeplitzElement};
use crate::circle::CircleOp;
use crate::error::{CalcError, Result};
use crate::linalg::{hermitian_defect, is_diagonal_01, max_abs, range_basis, singular_values, CMat};

use super::galerkin::{galerkin_matrix, galerkin_rect};

/// Rank data of one finite section.
#[derive(Debug, Clone, PartialEq)]
pub struct SectionData {
    pub modes: usize,
    pub kernel: usize,
    pub cokernel: usize,
    /// Smallest singular value counted as nonzero (over both sections).
    pub smallest_retained: f64,
    /// Largest singular value counted as zero, or 0.
    pub largest_discarded: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexReport {
    pub kernel: usize,
    pub cokernel: usize,
    pub index: i64,
    pub smallest_retained: f64,
    pub largest_discarded: f64,
    pub threshold: f64,
    pub modes: usize,
    /// Kernel and cokernel agree at `M` and `2M`, and the smallest retained
    /// singular value does not collapse between them.
    pub stable: bool,
    pub doubled: SectionData,
}

impl IndexReport {
    pub fn verdict(&self) -> &'static str {
        if self.stable {
            "resolved"
        } else {
            "unresolved"
        }
    }
}

/// Orthonormal basis of the range of the spectral projection of `gp` for
/// eigenvalues above 1/2.
pub fn discrete_range(gp: &CMat) -> CMat {
    let n = gp.nrows();
    if is_diagonal_01(gp) {
        let cols: Vec<DVector<Complex64>> = (0..n)
            .filter(|&i| gp[(i, i)].re == 1.0)
            .map(|i| {
                let mut e = DVector::zeros(n);
                e[i] = Complex64::new(1.0, 0.0);
                e
            })
            .collect();
        return if cols.is_empty() {
            CMat::zeros(n, 0)
        } else {
            CMat::from_columns(&cols)
        };
    }
    if hermitian_defect(gp) <= 1e-12 * max_abs(gp).max(1.0) {
        let h = (gp + gp.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = h.symmetric_eigen();
        let mut idx: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] > 0.5).collect();
        idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let cols: Vec<DVector<Complex64>> = idx.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect();
        return if cols.is_empty() {
            CMat::zeros(n, 0)
        } else {
            CMat::from_columns(&cols)
        };
    }
    range_basis(&spectral_projection(gp), 0.5)
}

/// Newton–Schulz refinement `X ← 3X² − 2X³` of a nearly idempotent matrix;
/// converges to the Riesz projection for the eigenvalues near 1.
pub fn spectral_projection(gp: &CMat) -> CMat {
    let mut x = gp.clone();
    let three = Complex64::new(3.0, 0.0);
    let two = Complex64::new(2.0, 0.0);
    for _ in 0..60 {
        let x2 = &x * &x;
        if max_abs(&(&x2 - &x)) < 1e-13 {
            break;
        }
        let x3 = &x2 * &x;
        x = x2 * three - x3 * two;
    }
    x
}

/// Eigenvalues of a (possibly non-normal) square matrix, or `None` when
/// the QR iteration does not converge.
pub fn eigenvalues(m: &CMat) -> Option<Vec<Complex64>> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]).eigenvalues().ok()
}

fn rank_split(sv: &[f64], tau: f64) -> (usize, f64, f64, f64) {
    let thr = tau * sv.first().copied().unwrap_or(0.0);
    let rank = sv.iter().filter(|&&s| s >= thr && s > 0.0).count();
    let retained = sv[..rank].last().copied().unwrap_or(0.0);
    let discarded = sv.get(rank).copied().unwrap_or(0.0);
    (rank, retained, discarded, thr)
}

/// Discrete subspace: a set of coordinate vectors or an orthonormal basis.
enum Subspace {
    Coordinates(Vec<usize>),
    Basis(CMat),
}

impl Subspace {
    fn dim(&self) -> usize {
        match self {
            Subspace::Coordinates(idx) => idx.len(),
            Subspace::Basis(q) => q.ncols(),
        }
    }

    /// `Q₁ᴴ g Q₀`.
    fn compress(q1: &Self, g: &CMat, q0: &Self) -> CMat {
        let right = match q0 {
            Subspace::Coordinates(idx) => g.select_columns(idx),
            Subspace::Basis(q) => g * q,
        };
        match q1 {
            Subspace::Coordinates(idx) => right.select_rows(idx),
            Subspace::Basis(q) => q.adjoint() * right,
        }
    }
}

fn projection_range(p: &ProjectionHandle<CircleOp>, modes: usize, adjoint: bool) -> Result<Subspace> {
    let g = galerkin_matrix(p.op(), modes)?.matrix;
    let g = if adjoint { g.adjoint() } else { g };
    if is_diagonal_01(&g) {
        return Ok(Subspace::Coordinates((0..g.nrows()).filter(|&i| g[(i, i)].re == 1.0).collect()));
    }
    Ok(Subspace::Basis(discrete_range(&g)))
}

/// Kernel and cokernel of the compression `Q₁ᴴ Gal(A) Q₀` at resolution `M`,
/// using a codomain window enlarged by the reach of `A` so that the shift
/// out of the window is not mistaken for a cokernel. Operators of nonzero
/// order are weighted by `⟨n⟩^{−μ}` on the domain side.
pub fn section(t: &ToeplitzElement<CircleOp>, modes: usize, tau: f64) -> Result<SectionData> {
    let a = t.inner();
    let mu = a.order();
    let k = a.reach();
    let big = modes + k;

    let g = galerkin_rect(a, big, modes)?.weighted(mu, mu).matrix;
    let q0 = projection_range(t.p0(), modes, false)?;
    let q1 = projection_range(t.p1(), big, false)?;
    let tm = Subspace::compress(&q1, &g, &q0);
    let sv = singular_values(&tm);
    let (rank, ret, disc, thr) = rank_split(&sv, tau);
    let kernel = q0.dim() - rank;

    // adjoint section: domain range(P₁*) at M, codomain range(P₀*) at M + K
    let gw = galerkin_rect(a, modes, big)?.weighted(mu, mu).matrix;
    let q1s = projection_range(t.p1(), modes, true)?;
    let q0s = projection_range(t.p0(), big, true)?;
    let ts = Subspace::compress(&q0s, &gw.adjoint(), &q1s);
    let sv_s = singular_values(&ts);
    let (rank_s, ret_s, disc_s, _) = rank_split(&sv_s, tau);
    let cokernel = q1s.dim() - rank_s;

    let smallest = match (rank, rank_s) {
        (0, 0) => 0.0,
        (0, _) => ret_s,
        (_, 0) => ret,
        _ => ret.min(ret_s),
    };
    Ok(SectionData {
        modes,
        kernel,
        cokernel,
        smallest_retained: smallest,
        largest_discarded: disc.max(disc_s),
        threshold: thr,
    })
}

/// Smallest admissible ratio between the smallest retained singular values
/// at `2M` and at `M`. Sections of Fredholm elements converge, so the ratio
/// tends to 1; a zero of order `p` of the restricted symbol makes it tend to
/// `2^{−p}`.
pub const SHRINK_LIMIT: f64 = 0.75;

/// Finite-section index at `M`, confirmed at `2M`.
pub fn numerical_index(t: &ToeplitzElement<CircleOp>, modes: usize, tau: f64) -> Result<IndexReport> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(CalcError::InvalidInput(format!("threshold {tau} must lie in (0, 1)")));
    }
    let s1 = section(t, modes, tau)?;
    let s2 = section(t, 2 * modes, tau)?;
    // a collapsing singular value belongs to a null vector whose tail decays
    // too slowly for this M, or to an element that is not Fredholm
    let collapsing = s2.smallest_retained < SHRINK_LIMIT * s1.smallest_retained;
    let stable = s1.kernel == s2.kernel && s1.cokernel == s2.cokernel && !collapsing;
    Ok(IndexReport {
        kernel: s1.kernel,
        cokernel: s1.cokernel,
        index: s1.kernel as i64 - s1.cokernel as i64,
        smallest_retained: s1.smallest_retained,
        largest_discarded: s1.largest_discarded,
        threshold: s1.threshold,
        modes,
        stable,
        doubled: s2,
    })
}

/// Dimension of the numerical kernel of a square section of `op`.
pub fn square_kernel_dim(op: &CircleOp, modes: usize, tau: f64) -> Result<usize> {
    let g = galerkin_matrix(op, modes)?.matrix;
    let sv = singular_values(&g);
    let (rank, ..) = rank_split(&sv, tau);
    Ok(g.ncols() - rank)
}
