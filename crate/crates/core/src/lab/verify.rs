//! Operator-level consistency checks for one Toeplitz problem.

use crate::algebra::{
    parametrix_bootstrap, BootstrapOptions, Calculus, CandidateKind, ProjectionHandle, ToeplitzElement,
};
use crate::circle::ellipticity::check_ellipticity;
use crate::circle::inverse::candidate;
use crate::circle::projections::complete_from_principal;
use crate::circle::{CircleOp, ClassicalSymbol, HomComponent};
use crate::error::{CalcError, Result};
use crate::linalg::{hermitian_defect, CMat};

use super::galerkin::galerkin_matrix;
use super::index::{numerical_index, section, square_kernel_dim};
use super::instances::{random_trig, rng};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub modes: usize,
    pub tau: f64,
    pub grid: usize,
    pub cond: f64,
    pub depth: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            modes: 64,
            tau: 1e-8,
            grid: 256,
            cond: 1e8,
            depth: 5,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// `W = A*A + (1−P₀)*(1−P₀)` in the ambient algebra.
pub fn witness(t: &ToeplitzElement<CircleOp>) -> Result<CircleOp> {
    let a = t.inner();
    let q = t.p0().complement()?;
    a.adjoint().compose(a)?.add(&q.op().adjoint().compose(q.op())?)
}

pub struct KernelIdentity {
    pub witness_kernel: usize,
    pub section_kernel: usize,
    pub hermitian_defect: Option<f64>,
}

/// Compares `dim ker Gal(W)` with the kernel of the compressed section.
pub fn kernel_identity(t: &ToeplitzElement<CircleOp>, modes: usize, tau: f64) -> Result<KernelIdentity> {
    let w = witness(t)?;
    let witness_kernel = square_kernel_dim(&w, modes, tau)?;
    let section_kernel = section(t, modes, tau)?.kernel;
    let p0 = t.p0().op();
    let orthogonal = p0.symbol().adjoint() == *p0.symbol();
    let hermitian_defect = if orthogonal {
        let g = galerkin_matrix(&w, modes)?.matrix;
        Some(hermitian_defect(&g))
    } else {
        None
    };
    Ok(KernelIdentity {
        witness_kernel,
        section_kernel,
        hermitian_defect,
    })
}

/// Smallest cutoff `c` such that the columns `|n| > c` of `Gal(R)` have
/// Frobenius norm below `tau` (an upper bound for their spectral norm).
pub fn tail_cutoff(r: &CMat, modes: usize, dim: usize, tau: f64) -> usize {
    let col_norm2 = |n: i64| -> f64 {
        let c0 = (n + modes as i64) as usize * dim;
        (c0..c0 + dim)
            .map(|j| r.column(j).iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum()
    };
    let mut tail = 0.0;
    for c in (0..=modes).rev() {
        let add = if c == 0 {
            col_norm2(0)
        } else {
            col_norm2(c as i64) + col_norm2(-(c as i64))
        };
        if (tail + add).sqrt() >= tau {
            return c;
        }
        tail += add;
    }
    0
}

fn check(name: &'static str, passed: bool, detail: String) -> CheckResult {
    CheckResult { name, passed, detail }
}

/// A seeded order −1 perturbation, vanishing at principal level, for the
/// projection-perturbation check.
fn lower_order_noise(dim: usize, depth: usize, seed: u64) -> ClassicalSymbol {
    let mut r = rng(seed);
    let mut e = ClassicalSymbol::zero(0, dim, dim, depth);
    for j in 1..depth {
        *e.component_mut(j) = HomComponent::new(random_trig(&mut r, dim, dim, 1, 1, 10), random_trig(&mut r, dim, dim, 1, 1, 10));
    }
    e
}

fn perturbed(p: &ProjectionHandle<CircleOp>, seed: u64) -> Result<ProjectionHandle<CircleOp>> {
    let s = p.op().symbol();
    let noise = lower_order_noise(p.dim(), s.depth(), seed);
    Ok(complete_from_principal(s.principal().clone(), Some(&noise), s.depth(), p.op().exact_modes())?.projection)
}

fn verdict_kind(t: &ToeplitzElement<CircleOp>, grid: usize, cond: f64) -> Result<&'static str> {
    let k = t.inner().symbol().principal().bandwidth().max(
        t.p0()
            .op()
            .symbol()
            .principal()
            .bandwidth()
            .max(t.p1().op().symbol().principal().bandwidth()),
    );
    let c = check_ellipticity(t, grid.max(4 * (k + 1)), cond)?;
    Ok(match c.verdict {
        crate::certificate::Verdict::Elliptic => "elliptic",
        crate::certificate::Verdict::NotElliptic { .. } => "not elliptic",
        crate::certificate::Verdict::RankMismatch { .. } => "rank mismatch",
    })
}

/// Runs checks (i)–(vi) on an order-zero Toeplitz element.
pub fn verify_suite(t: &ToeplitzElement<CircleOp>, opts: VerifyOptions) -> Result<VerifyReport> {
    if t.order() != 0 {
        return Err(CalcError::InvalidInput("verification needs an order-zero element; reduce first".into()));
    }
    let (m, tau) = (opts.modes, opts.tau);
    let mut checks = Vec::new();

    // (i) kernel identity and self-adjointness of the witness
    let ki = kernel_identity(t, m, tau)?;
    let herm_ok = ki.hermitian_defect.is_none_or(|d| d <= 1e-10);
    checks.push(check(
        "kernel identity",
        ki.witness_kernel == ki.section_kernel && herm_ok,
        format!(
            "dim ker Gal(W) = {}, dim ker section = {}, witness hermitian defect {}",
            ki.witness_kernel,
            ki.section_kernel,
            ki.hermitian_defect.map_or("n/a".to_string(), |d| format!("{d:e}"))
        ),
    ));

    // (ii) ker T*T = ker T
    let tt = ToeplitzElement::new(t.inner().adjoint().compose(t.inner())?, t.p0().clone(), t.p0().clone())?;
    let k_tt = section(&tt, m, tau)?.kernel;
    let k_t = section(t, m, tau)?.kernel;
    checks.push(check(
        "kernel of T*T",
        k_tt == k_t,
        format!("dim ker T*T = {k_tt}, dim ker T = {k_t}"),
    ));

    // (iii) index of the adjoint
    let ind = numerical_index(t, m, tau)?;
    let ind_adj = numerical_index(&t.adjoint()?, m, tau)?;
    checks.push(check(
        "adjoint index",
        ind.stable && ind_adj.stable && ind_adj.index == -ind.index,
        format!(
            "index(A) = {} ({}), index(A*) = {} ({})",
            ind.index,
            ind.verdict(),
            ind_adj.index,
            ind_adj.verdict()
        ),
    ));

    // (iv) compactness proxy on the parametrix residual, or on the
    // smoothing part of A when no parametrix exists
    let bopts = BootstrapOptions {
        depth: opts.depth,
        zero_tol: 1e-12,
    };
    let residual = candidate(t.inner(), t.p0(), t.p1())
        .and_then(|(c, _)| parametrix_bootstrap(t, &c, &c, CandidateKind::FullAlgebra, bopts))
        .map(|p| (p.left_residual, "parametrix residual"));
    let (r, what) = match residual {
        Ok(x) => x,
        Err(_) => (
            CircleOp::smoothing(t.inner().kernel().clone(), 0, t.depth(), 0),
            "smoothing part of A",
        ),
    };
    let dim = r.source_dim();
    let c1 = tail_cutoff(&galerkin_matrix(&r, m)?.matrix, m, dim, tau);
    let c2 = tail_cutoff(&galerkin_matrix(&r, 2 * m)?.matrix, 2 * m, dim, tau);
    checks.push(check(
        "compactness proxy",
        c1 < m && c2 <= c1,
        format!("{what}: tail cutoff {c1} at M = {m}, {c2} at M = {}", 2 * m),
    ));

    // (v) σ-axioms: multiplicativity, adjoint, smoothing
    let a = t.inner().symbol();
    let prod = a.adjoint().compose(a)?;
    let pa = a.principal();
    let pad = a.adjoint().principal().clone();
    let mult = prod.principal().plus == pad.plus.mul(&pa.plus) && prod.principal().minus == pad.minus.mul(&pa.minus);
    let adj = pad.plus == pa.plus.adjoint() && pad.minus == pa.minus.adjoint();
    let smoothing = CircleOp::smoothing(t.inner().kernel().clone(), 0, a.depth(), 0);
    let zero_sym = smoothing.symbol().is_zero();
    checks.push(check(
        "sigma axioms",
        mult && adj && zero_sym,
        format!("multiplicative {mult}, adjoint {adj}, smoothing symbol zero {zero_sym}"),
    ));

    // (vi) projection perturbation
    let q0 = perturbed(t.p0(), opts.seed)?;
    let q1 = perturbed(t.p1(), opts.seed.wrapping_add(1))?;
    let tq = crate::algebra::toeplitz_compress(t.inner(), &q0, &q1)?;
    let v_p = verdict_kind(t, opts.grid, opts.cond)?;
    let v_q = verdict_kind(&tq, opts.grid, opts.cond)?;
    checks.push(check(
        "projection perturbation",
        v_p == v_q,
        format!("verdict with P: {v_p}, with perturbed Q: {v_q}"),
    ));

    Ok(VerifyReport { checks })
}
