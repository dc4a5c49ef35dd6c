//! Pointwise inversion of restricted principal symbols, and the ambient
//! parametrix provider built on it.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::algebra::{
    parametrix_bootstrap, AmbientSolver, BootstrapOptions, CandidateKind, ProjectionHandle, ToeplitzElement,
};
use crate::error::{CalcError, Result};
use crate::linalg::{range_basis, CMat};
use crate::scalar::{cq_from_c64_rounded, QMat};

use super::ellipticity::check_restricted;
use super::operator::CircleOp;
use super::symbol::{ClassicalSymbol, HomComponent};
use super::trig::TrigPoly;

/// Dyadic precision for sampled inverses entering the exact calculus.
const SAMPLE_BITS: i32 = 48;

#[derive(Debug, Clone)]
pub struct PointwiseInverse {
    pub component: HomComponent,
    /// Set when some branch had to be sampled and rounded.
    pub approximate: bool,
}

/// Left inverse of the restricted symbol `σ: range π₀ → range π₁`,
/// normalised so that `c = π₀ c π₁`. Exact whenever the relevant
/// determinant is a monomial `c e^{ikθ}`; otherwise sampled on a grid,
/// Fourier-transformed and rounded to `2^-48`.
pub fn restricted_inverse(sigma: &HomComponent, pi0: &HomComponent, pi1: &HomComponent) -> Result<PointwiseInverse> {
    let (plus, ap) = branch_inverse(&sigma.plus, &pi0.plus, &pi1.plus)?;
    let (minus, am) = branch_inverse(&sigma.minus, &pi0.minus, &pi1.minus)?;
    Ok(PointwiseInverse {
        component: HomComponent::new(plus, minus),
        approximate: ap || am,
    })
}

fn is_identity(p: &TrigPoly) -> bool {
    *p == TrigPoly::identity(p.rows())
}

fn branch_inverse(sigma: &TrigPoly, pi0: &TrigPoly, pi1: &TrigPoly) -> Result<(TrigPoly, bool)> {
    let (r1, r0) = sigma.dims();
    if pi0.dims() != (r0, r0) || pi1.dims() != (r1, r1) {
        return Err(CalcError::DimensionMismatch("projection symbols do not fit the operator".into()));
    }
    if pi0.is_zero() || pi1.is_zero() {
        return Ok((TrigPoly::zero(r0, r1), false));
    }
    if is_identity(pi0) && is_identity(pi1) {
        if let Some(inv) = sigma.exact_inverse() {
            return Ok((inv, false));
        }
    } else if pi0.adjoint() == *pi0 && pi1.adjoint() == *pi1 {
        // (π₀σᴴπ₁σπ₀ + 1 − π₀)^{-1} π₀σᴴπ₁
        let sh = pi0.mul(&sigma.adjoint()).mul(pi1);
        let g = sh.mul(sigma).mul(pi0).add(&TrigPoly::identity(r0).sub(pi0));
        if let Some(gi) = g.exact_inverse() {
            return Ok((gi.mul(&sh), false));
        }
    }
    Ok((sampled_inverse(sigma, pi0, pi1)?, true))
}

fn sampled_inverse(sigma: &TrigPoly, pi0: &TrigPoly, pi1: &TrigPoly) -> Result<TrigPoly> {
    let (r1, r0) = sigma.dims();
    let k = sigma.bandwidth().max(pi0.bandwidth()).max(pi1.bandwidth());
    let n = (16 * (k + 1)).max(256).next_power_of_two();
    let mut samples: Vec<CMat> = Vec::with_capacity(n);
    for j in 0..n {
        let theta = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
        let u0 = range_basis(&pi0.eval(theta), 0.5);
        let u1 = range_basis(&pi1.eval(theta), 0.5);
        let s = u1.adjoint() * sigma.eval(theta) * &u0;
        let si = s.try_inverse().ok_or_else(|| {
            CalcError::Numerical(format!("restricted symbol is singular at theta = {theta}"))
        })?;
        samples.push(&u0 * si * u1.adjoint() * pi1.eval(theta));
    }
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    let mut coeffs: Vec<CMat> = vec![CMat::zeros(r0, r1); n];
    let mut buf = vec![Complex64::default(); n];
    for r in 0..r0 {
        for c in 0..r1 {
            for (j, s) in samples.iter().enumerate() {
                buf[j] = s[(r, c)];
            }
            fft.process(&mut buf);
            for (j, z) in buf.iter().enumerate() {
                coeffs[j][(r, c)] = z / n as f64;
            }
        }
    }
    let half = (n / 2) as i64;
    let mut out = TrigPoly::zero(r0, r1);
    for (j, m) in coeffs.iter().enumerate() {
        let mode = if (j as i64) < half { j as i64 } else { j as i64 - n as i64 };
        let q = QMat::from_fn(r0, r1, |r, c| cq_from_c64_rounded(m[(r, c)], SAMPLE_BITS));
        if !q.is_zero() {
            out.add_term(mode, &q);
        }
    }
    Ok(out)
}

/// Order `−μ` candidate whose principal part inverts the restricted symbol
/// of `A`, padded with zero components to the depth of `A`.
pub fn candidate(
    a: &CircleOp,
    p0: &ProjectionHandle<CircleOp>,
    p1: &ProjectionHandle<CircleOp>,
) -> Result<(CircleOp, bool)> {
    let inv = restricted_inverse(
        a.symbol().principal(),
        p0.op().symbol().principal(),
        p1.op().symbol().principal(),
    )?;
    let s = a.symbol();
    let mut c = ClassicalSymbol::zero(-s.order(), s.cols(), s.rows(), s.depth());
    *c.component_mut(0) = inv.component;
    Ok((CircleOp::from_symbol(c, a.exact_modes()), inv.approximate))
}

/// Ambient parametrices from pointwise principal inverses followed by the
/// Neumann bootstrap with full projections.
#[derive(Debug, Clone, Copy)]
pub struct PointwiseSolver {
    pub grid: usize,
    pub cond: f64,
    pub options: BootstrapOptions,
}

impl Default for PointwiseSolver {
    fn default() -> Self {
        Self {
            grid: 256,
            cond: 1e8,
            options: BootstrapOptions::default(),
        }
    }
}

impl AmbientSolver<CircleOp> for PointwiseSolver {
    fn check_invertible(&self, w: &CircleOp) -> Result<()> {
        let one = ProjectionHandle::new(CircleOp::identity(w.symbol().rows(), w.symbol().depth(), w.exact_modes()))?;
        let k = w.symbol().principal().bandwidth();
        let grid = self.grid.max(4 * (k + 1));
        check_restricted(w, &one, &one, grid, self.cond)?.into_result().map(|_| ())
    }

    fn parametrix(&self, w: &CircleOp) -> Result<(CircleOp, f64)> {
        let one = ProjectionHandle::new(CircleOp::identity(w.symbol().rows(), w.symbol().depth(), w.exact_modes()))?;
        let (c, _) = candidate(w, &one, &one)?;
        let t = ToeplitzElement::new(w.clone(), one.clone(), one)?;
        let p = parametrix_bootstrap(&t, &c, &c, CandidateKind::FullAlgebra, self.options)?;
        Ok((p.b.inner().clone(), p.discarded))
    }
}
