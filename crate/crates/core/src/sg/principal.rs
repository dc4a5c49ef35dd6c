//! The three principal symbols of an SG symbol and the restricted
//! ellipticity test built on them.

use std::f64::consts::PI;

use crate::algebra::{Calculus, ToeplitzElement};
use crate::certificate::{Certificate, Verdict};
use crate::error::{Branch, CalcError, Result, Witness};
use crate::linalg::{range_basis, singular_values, CMat};
use crate::scalar::QMat;

use super::onevar::{deg, OneVar};
use super::symbol::{BiOrder, SgSymbol};

fn idx(b: Branch) -> usize {
    match b {
        Branch::Plus => 0,
        Branch::Minus => 1,
    }
}

/// `σ^μ` (functions of `x`, one per ξ-branch), `σ_m` (functions of `ξ`,
/// one per x-branch) and the corner values `σ^μ_m[x-branch][ξ-branch]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThreeSymbols {
    pub order: BiOrder,
    pub interior: [OneVar; 2],
    pub exit: [OneVar; 2],
    pub corners: [[QMat; 2]; 2],
}

impl ThreeSymbols {
    pub fn interior(&self, xi_branch: Branch) -> &OneVar {
        &self.interior[idx(xi_branch)]
    }

    pub fn exit(&self, x_branch: Branch) -> &OneVar {
        &self.exit[idx(x_branch)]
    }

    pub fn corner(&self, x_branch: Branch, xi_branch: Branch) -> &QMat {
        &self.corners[idx(x_branch)][idx(xi_branch)]
    }

    /// Pointwise product at all three levels.
    pub fn product(&self, rhs: &Self) -> Result<Self> {
        let i = [self.interior[0].mul(&rhs.interior[0])?, self.interior[1].mul(&rhs.interior[1])?];
        let e = [self.exit[0].mul(&rhs.exit[0])?, self.exit[1].mul(&rhs.exit[1])?];
        let c = |a: usize, b: usize| self.corners[a][b].mul(&rhs.corners[a][b]);
        Ok(Self {
            order: self.order + rhs.order,
            interior: i,
            exit: e,
            corners: [[c(0, 0), c(0, 1)], [c(1, 0), c(1, 1)]],
        })
    }

    /// True when the x-asymptotics of `σ^μ` and the ξ-asymptotics of `σ_m`
    /// both reproduce the corners.
    pub fn corners_consistent(&self) -> bool {
        Branch::BOTH.iter().all(|&xb| {
            Branch::BOTH.iter().all(|&xib| {
                let c = self.corner(xb, xib);
                self.interior(xib).branch_value(deg(self.order.x), xb) == *c
                    && self.exit(xb).branch_value(deg(self.order.xi), xib) == *c
            })
        })
    }
}

pub fn three_symbols(a: &SgSymbol) -> ThreeSymbols {
    let order = a.order();
    let (r, c) = (a.rows(), a.cols());
    let mut interior = [OneVar::zero(r, c), OneVar::zero(r, c)];
    let mut exit = [OneVar::zero(r, c), OneVar::zero(r, c)];
    let mut corners = [[QMat::zeros(r, c), QMat::zeros(r, c)], [QMat::zeros(r, c), QMat::zeros(r, c)]];
    let signed = |m: &QMat, s: i64| if s == 1 { m.clone() } else { m.neg() };
    for ((bx, bxi), m) in a.terms() {
        let top_xi = bxi.degree == deg(order.xi);
        let top_x = bx.degree == deg(order.x);
        for b in Branch::BOTH {
            if top_xi {
                interior[idx(b)].add_term(*bx, &signed(m, bxi.branch_value(b)));
            }
            if top_x {
                exit[idx(b)].add_term(*bxi, &signed(m, bx.branch_value(b)));
            }
        }
        if top_xi && top_x {
            for xb in Branch::BOTH {
                for xib in Branch::BOTH {
                    corners[idx(xb)][idx(xib)]
                        .add_assign(&signed(m, bx.branch_value(xb) * bxi.branch_value(xib)));
                }
            }
        }
    }
    ThreeSymbols {
        order,
        interior,
        exit,
        corners,
    }
}

/// `tan t_j` for `t_j` uniform in `(−π/2, π/2)`; odd sizes so that `0` is a
/// sample point.
pub fn line_grid(size: usize) -> Vec<f64> {
    let g = size | 1;
    let h = (g - 1) / 2;
    (0..g)
        .map(|j| {
            if j == h {
                0.0
            } else {
                (-PI / 2.0 + PI * (j + 1) as f64 / (g + 1) as f64).tan()
            }
        })
        .collect()
}

fn japanese(t: f64, power: i64) -> f64 {
    (1.0 + t * t).powf(power as f64 / 2.0)
}

struct Scan {
    min_sv: f64,
    argmin: Option<Witness>,
    grid: usize,
}

impl Scan {
    fn record(&mut self, s: f64, w: Witness) {
        if s < self.min_sv {
            self.min_sv = s;
            self.argmin = Some(w);
        }
    }
}

fn restricted(sigma: &CMat, pi0: &CMat, pi1: &CMat) -> (CMat, usize, usize) {
    let u0 = range_basis(pi0, 0.5);
    let u1 = range_basis(pi1, 0.5);
    let (r0, r1) = (u0.ncols(), u1.ncols());
    (u1.adjoint() * sigma * u0, r0, r1)
}

fn rank_mismatch(source_rank: usize, target_rank: usize, witness: Witness, grid: usize, cond: f64) -> Certificate {
    Certificate {
        verdict: Verdict::RankMismatch {
            source_rank,
            target_rank,
            witness,
        },
        min_singular_value: 0.0,
        argmin: None,
        grid,
        cond,
    }
}

/// Samples one non-compact direction. Returns a rank-mismatch certificate
/// early if the restricted ranks differ anywhere.
#[allow(clippy::too_many_arguments)]
fn scan_direction(
    scan: &mut Scan,
    sigma: &OneVar,
    pi0: &OneVar,
    pi1: &OneVar,
    weight: i64,
    grid: &[f64],
    witness: impl Fn(f64) -> Witness,
    ranks: (usize, usize),
    cond: f64,
) -> Result<Option<Certificate>> {
    for &t in grid {
        let s = sigma.eval(t) * num_complex::Complex64::new(japanese(t, -weight), 0.0);
        let (m, r0, r1) = restricted(&s, &pi0.eval(t), &pi1.eval(t));
        if (r0, r1) != ranks {
            if r0 == r1 {
                return Err(CalcError::InvalidProjectionSymbol(format!(
                    "projection rank changes to {r0} at {}",
                    witness(t)
                )));
            }
            return Ok(Some(rank_mismatch(r0, r1, witness(t), scan.grid, cond)));
        }
        if r0 == 0 {
            continue;
        }
        let smin = singular_values(&m).last().copied().unwrap_or(0.0);
        scan.record(smin, witness(t));
    }
    Ok(None)
}

/// Tests the restricted `σ^μ`, `σ_m` (on `x = tan t`, `ξ = tan t` grids,
/// normalized by `⟨x⟩^{−m}` resp. `⟨ξ⟩^{−μ}`) and the corners (exact ranks).
pub fn sg_check_ellipticity(
    t: &ToeplitzElement<SgSymbol>,
    x_grid: usize,
    xi_grid: usize,
    cond: f64,
) -> Result<Certificate> {
    if x_grid < 3 || xi_grid < 3 {
        return Err(CalcError::InvalidInput("grids need at least 3 points".into()));
    }
    let a = three_symbols(t.inner());
    let p0 = three_symbols(t.p0().op());
    let p1 = three_symbols(t.p1().op());
    let order = t.inner().order();
    let mut scan = Scan {
        min_sv: f64::INFINITY,
        argmin: None,
        grid: x_grid.max(xi_grid) | 1,
    };

    // corners: exact ranks decide, singular values only report the margin
    let mut corner_ranks = Vec::new();
    for xb in Branch::BOTH {
        for xib in Branch::BOTH {
            let w = Witness::SgCorner {
                x_branch: xb,
                xi_branch: xib,
            };
            let (pi0, pi1, s) = (p0.corner(xb, xib), p1.corner(xb, xib), a.corner(xb, xib));
            let (r0, r1) = (pi0.rank(), pi1.rank());
            if r0 != r1 {
                return Ok(rank_mismatch(r0, r1, w, scan.grid, cond));
            }
            if pi1.mul(s).mul(pi0).rank() < r0 {
                return Ok(Certificate {
                    verdict: Verdict::NotElliptic { witness: w.clone() },
                    min_singular_value: 0.0,
                    argmin: Some(w),
                    grid: scan.grid,
                    cond,
                });
            }
            if r0 > 0 {
                let (m, ..) = restricted(&s.to_c64(), &pi0.to_c64(), &pi1.to_c64());
                scan.record(singular_values(&m).last().copied().unwrap_or(0.0), w);
            }
            corner_ranks.push(((xb, xib), (r0, r1)));
        }
    }
    let rank_at = |xb: Branch, xib: Branch| corner_ranks.iter().find(|(k, _)| *k == (xb, xib)).unwrap().1;

    let xs = line_grid(x_grid);
    for xib in Branch::BOTH {
        // x-asymptotics of the interior symbol are the corners at (±, xib)
        let ranks = rank_at(Branch::Plus, xib);
        if let Some(c) = scan_direction(
            &mut scan,
            a.interior(xib),
            p0.interior(xib),
            p1.interior(xib),
            order.x,
            &xs,
            |x| Witness::SgInterior { xi_branch: xib, x },
            ranks,
            cond,
        )? {
            return Ok(c);
        }
    }
    let xis = line_grid(xi_grid);
    for xb in Branch::BOTH {
        let ranks = rank_at(xb, Branch::Plus);
        if let Some(c) = scan_direction(
            &mut scan,
            a.exit(xb),
            p0.exit(xb),
            p1.exit(xb),
            order.xi,
            &xis,
            |xi| Witness::SgExit { x_branch: xb, xi },
            ranks,
            cond,
        )? {
            return Ok(c);
        }
    }

    let verdict = if scan.min_sv >= 1.0 / cond {
        Verdict::Elliptic
    } else {
        Verdict::NotElliptic {
            witness: scan.argmin.clone().expect("a sampled point"),
        }
    };
    Ok(Certificate {
        verdict,
        min_singular_value: if scan.min_sv.is_finite() { scan.min_sv } else { 1.0 },
        argmin: scan.argmin,
        grid: scan.grid,
        cond,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::ProjectionHandle;
    use crate::algebra::toeplitz_compress;
    use crate::scalar::cq_int;
    use crate::sg::onevar::Basis;

    fn full(depth: usize) -> ProjectionHandle<SgSymbol> {
        ProjectionHandle::new(SgSymbol::identity(1, depth)).unwrap()
    }

    #[test]
    fn weight_has_unit_symbols() {
        let a = SgSymbol::weight(BiOrder::new(2, 3), 1, 3);
        let s = three_symbols(&a);
        for b in Branch::BOTH {
            assert_eq!(*s.interior(b), OneVar::scalar(&[(Basis::even(deg(3)), cq_int(1, 0))]));
            assert_eq!(*s.exit(b), OneVar::scalar(&[(Basis::even(deg(2)), cq_int(1, 0))]));
            for c in Branch::BOTH {
                assert_eq!(*s.corner(b, c), QMat::identity(1));
            }
        }
        assert!(s.corners_consistent());
    }

    #[test]
    fn x_xi_corners_are_sign_products() {
        let a = SgSymbol::monomial(BiOrder::new(1, 1), 3, Basis::odd(deg(1)), Basis::odd(deg(1)), QMat::identity(1))
            .unwrap();
        let s = three_symbols(&a);
        for xb in Branch::BOTH {
            for xib in Branch::BOTH {
                assert_eq!(*s.corner(xb, xib), QMat::scalar(cq_int(xb.sign() * xib.sign(), 0)));
            }
        }
    }

    #[test]
    fn multiplication_by_x_fails_at_origin() {
        let a = SgSymbol::monomial(BiOrder::new(0, 1), 3, Basis::odd(deg(1)), Basis::even(deg(0)), QMat::identity(1))
            .unwrap();
        let p = full(3);
        let t = toeplitz_compress(&a, &p, &p).unwrap();
        let c = sg_check_ellipticity(&t, 65, 65, 1e8).unwrap();
        assert_eq!(
            c.verdict,
            Verdict::NotElliptic {
                witness: Witness::SgInterior {
                    xi_branch: Branch::Plus,
                    x: 0.0
                }
            }
        );
    }

    #[test]
    fn weight_is_elliptic() {
        let p = full(3);
        let a = SgSymbol::weight(BiOrder::new(1, 1), 1, 3);
        let t = toeplitz_compress(&a, &p, &p).unwrap();
        let c = sg_check_ellipticity(&t, 33, 33, 1e8).unwrap();
        assert!(c.is_elliptic());
        assert!((c.min_singular_value - 1.0).abs() < 1e-12);
    }
}
