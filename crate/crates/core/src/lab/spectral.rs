//! Inverses inside the Toeplitz algebra: a parametrix corrected by a
//! finite-section solve sandwiched between its residuals.

use crate::algebra::{Calculus, Parametrix, ToeplitzElement};
use crate::circle::{CircleOp, SmoothingKernel};
use crate::error::{CalcError, Result};
use crate::linalg::{norm2, singular_values, CMat};

use super::galerkin::{galerkin_matrix, GalerkinMatrix};
use super::index::{discrete_range, numerical_index};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralOptions {
    pub modes: usize,
    pub tau: f64,
    /// Largest admissible condition number of the compressed section.
    pub cond: f64,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self {
            modes: 64,
            tau: 1e-8,
            cond: 1e8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpectralInverse {
    pub element: ToeplitzElement<CircleOp>,
    /// `‖Gal(B)Gal(A) − Gal(P₀)‖₂` at the working resolution.
    pub left_residual: f64,
    /// `‖Gal(A)Gal(B) − Gal(P₁)‖₂`.
    pub right_residual: f64,
    /// The same residuals restricted to the input modes `|n| ≤ M/2`, away
    /// from truncation effects of non-coordinate projections.
    pub left_interior: f64,
    pub right_interior: f64,
    pub condition: f64,
    pub modes: usize,
}

/// `A⁻¹ = B + R₀B + R₀ (P₀ A⁻¹ P₁) R₁` with `R₀ = P₀ − BA`, `R₁ = P₁ − AB`.
/// The symbolic part `B + R₀B` is kept exactly; the remaining term is
/// computed on the window `|n| ≤ M` and stored as a kernel tagged with `M`.
pub fn spectral_inverse(
    a: &ToeplitzElement<CircleOp>,
    b: &Parametrix<CircleOp>,
    opts: SpectralOptions,
) -> Result<SpectralInverse> {
    let report = numerical_index(a, opts.modes, opts.tau)?;
    if !report.stable {
        return Err(CalcError::NotInvertibleAt { modes: opts.modes });
    }
    if report.kernel != 0 || report.cokernel != 0 {
        return Err(CalcError::NoTwoSidedInverse {
            kernel: report.kernel,
            cokernel: report.cokernel,
        });
    }
    let m = opts.modes;
    let a_op = a.inner();
    let b_op = b.b.inner();
    let p0 = a.p0().op();
    let p1 = a.p1().op();

    let am = galerkin_matrix(a_op, m)?.matrix;
    let bm = galerkin_matrix(b_op, m)?.matrix;
    let p0m = galerkin_matrix(p0, m)?.matrix;
    let p1m = galerkin_matrix(p1, m)?.matrix;
    let q0 = discrete_range(&p0m);
    let q1 = discrete_range(&p1m);
    if q0.ncols() != q1.ncols() {
        return Err(CalcError::NotInvertibleAt { modes: m });
    }
    let t = q1.adjoint() * &am * &q0;
    let sv = singular_values(&t);
    let condition = match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        (None, None) => 1.0,
        _ => f64::INFINITY,
    };
    if condition > opts.cond {
        return Err(CalcError::NotInvertibleAt { modes: m });
    }
    let t_inv = t.try_inverse().ok_or(CalcError::NotInvertibleAt { modes: m })?;
    let a_inv: CMat = &q0 * t_inv * q1.adjoint();

    let r0m = &p0m - &bm * &am;
    let r1m = &p1m - &am * &bm;
    let x = &bm + &r0m * &bm + &r0m * a_inv * &r1m;

    // exact symbolic part B + R₀ B
    let r0 = p0.sub(&b_op.compose(a_op)?)?;
    let sym = b_op.add(&r0.compose(b_op)?)?;
    let correction = &x - galerkin_matrix(&sym, m)?.matrix;
    let kernel = sym
        .kernel()
        .add(&SmoothingKernel::from_window(m, sym.target_dim(), sym.source_dim(), &correction));
    let result = sym.clone().with_resolution_kernel(kernel, m);

    let xm = galerkin_matrix(&result, m)?.matrix;
    let left = &xm * &am - &p0m;
    let right = &am * &xm - &p1m;
    let cols = |mat: &CMat, dim: usize| {
        let r = GalerkinMatrix::interior(m, dim, m / 2);
        mat.columns(r.start, r.len()).into_owned()
    };
    let left_interior = norm2(&cols(&left, a_op.source_dim()));
    let right_interior = norm2(&cols(&right, a_op.target_dim()));
    let left_residual = norm2(&left);
    let right_residual = norm2(&right);
    let element = ToeplitzElement::new(result, b.b.p0().clone(), b.b.p1().clone())?;
    Ok(SpectralInverse {
        element,
        left_residual,
        right_residual,
        left_interior,
        right_interior,
        condition,
        modes: m,
    })
}
