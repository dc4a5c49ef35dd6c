//! Principal and restricted symbols, and grid certification of
//! ellipticity.

use std::f64::consts::PI;

use crate::algebra::{Calculus, ProjectionHandle, ToeplitzElement};
use crate::certificate::{Certificate, Verdict};
use crate::error::{Branch, CalcError, Result, Witness};
use crate::linalg::{range_basis, singular_values, CMat};

use super::operator::CircleOp;
use super::trig::TrigPoly;

/// Principal matrices on one branch.
#[derive(Debug, Clone)]
pub struct BranchData {
    pub branch: Branch,
    pub pi0: TrigPoly,
    pub pi1: TrigPoly,
    pub sigma: TrigPoly,
    pub source_rank: usize,
    pub target_rank: usize,
}

impl BranchData {
    /// Restricted map `range π₀(θ) → range π₁(θ)` in orthonormal bases.
    pub fn restricted(&self, theta: f64) -> CMat {
        let u0 = range_basis(&self.pi0.eval(theta), 0.5);
        let u1 = range_basis(&self.pi1.eval(theta), 0.5);
        u1.adjoint() * self.sigma.eval(theta) * u0
    }
}

#[derive(Debug, Clone)]
pub struct RestrictedSymbolData {
    pub branches: [BranchData; 2],
    pub order: i64,
}

impl RestrictedSymbolData {
    pub fn bandwidth(&self) -> usize {
        self.branches
            .iter()
            .flat_map(|b| [b.pi0.bandwidth(), b.pi1.bandwidth(), b.sigma.bandwidth()])
            .max()
            .unwrap_or(0)
    }
}

pub fn grid_point(j: usize, g: usize) -> f64 {
    2.0 * PI * j as f64 / g as f64
}

fn constant_rank(p: &TrigPoly, branch: Branch, g: usize) -> Result<usize> {
    let mut rank = None;
    for j in 0..g {
        let r = range_basis(&p.eval(grid_point(j, g)), 0.5).ncols();
        match rank {
            None => rank = Some(r),
            Some(r0) if r0 != r => {
                return Err(CalcError::InvalidProjectionSymbol(format!(
                    "rank changes from {r0} to {r} on branch {branch} near theta = {}",
                    grid_point(j, g)
                )))
            }
            _ => {}
        }
    }
    Ok(rank.unwrap_or(0))
}

/// Principal symbols of `A`, `P₀`, `P₁` on both branches with their
/// (grid-checked constant) ranks.
pub fn principal_and_restricted(
    a: &CircleOp,
    p0: &ProjectionHandle<CircleOp>,
    p1: &ProjectionHandle<CircleOp>,
    grid: usize,
) -> Result<RestrictedSymbolData> {
    if a.source_dim() != p0.dim() || a.target_dim() != p1.dim() {
        return Err(CalcError::DimensionMismatch(
            "operator and projections do not fit".into(),
        ));
    }
    let sa = a.symbol().principal();
    let s0 = p0.op().symbol().principal();
    let s1 = p1.op().symbol().principal();
    let mk = |b: Branch| -> Result<BranchData> {
        let pi0 = s0.branch(b).clone();
        let pi1 = s1.branch(b).clone();
        Ok(BranchData {
            branch: b,
            source_rank: constant_rank(&pi0, b, grid)?,
            target_rank: constant_rank(&pi1, b, grid)?,
            sigma: sa.branch(b).clone(),
            pi0,
            pi1,
        })
    };
    Ok(RestrictedSymbolData {
        branches: [mk(Branch::Plus)?, mk(Branch::Minus)?],
        order: a.order(),
    })
}

/// Samples the restricted principal symbol on `grid` points per branch and
/// checks bijectivity with smallest singular value at least `1/cond`.
pub fn check_ellipticity(t: &ToeplitzElement<CircleOp>, grid: usize, cond: f64) -> Result<Certificate> {
    check_restricted(t.inner(), t.p0(), t.p1(), grid, cond)
}

pub fn check_restricted(
    a: &CircleOp,
    p0: &ProjectionHandle<CircleOp>,
    p1: &ProjectionHandle<CircleOp>,
    grid: usize,
    cond: f64,
) -> Result<Certificate> {
    let k = a
        .symbol()
        .principal()
        .bandwidth()
        .max(p0.op().symbol().principal().bandwidth())
        .max(p1.op().symbol().principal().bandwidth());
    if grid < 4 * (k + 1) {
        return Err(CalcError::InvalidInput(format!(
            "grid size {grid} is below 4(K+1) = {} for bandwidth K = {k}",
            4 * (k + 1)
        )));
    }
    let data = principal_and_restricted(a, p0, p1, grid)?;
    let mut min_sv = f64::INFINITY;
    let mut argmin = None;
    for b in &data.branches {
        if b.source_rank != b.target_rank {
            return Ok(Certificate {
                verdict: Verdict::RankMismatch {
                    source_rank: b.source_rank,
                    target_rank: b.target_rank,
                    witness: Witness::Circle {
                        branch: b.branch,
                        theta: 0.0,
                    },
                },
                min_singular_value: 0.0,
                argmin: None,
                grid,
                cond,
            });
        }
        if b.source_rank == 0 {
            continue;
        }
        for j in 0..grid {
            let theta = grid_point(j, grid);
            let s = singular_values(&b.restricted(theta));
            let smin = s.last().copied().unwrap_or(0.0);
            if smin < min_sv {
                min_sv = smin;
                argmin = Some(Witness::Circle {
                    branch: b.branch,
                    theta,
                });
            }
        }
    }
    let verdict = if min_sv >= 1.0 / cond {
        Verdict::Elliptic
    } else {
        Verdict::NotElliptic {
            witness: argmin.clone().expect("a sampled branch"),
        }
    };
    Ok(Certificate {
        verdict,
        min_singular_value: if min_sv.is_finite() { min_sv } else { 1.0 },
        argmin,
        grid,
        cond,
    })
}
