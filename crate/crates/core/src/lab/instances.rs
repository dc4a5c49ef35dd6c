//! Seeded instance generators for the verification scenarios.

use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{toeplitz_compress, Completion, ToeplitzElement};
use crate::circle::projections::{complete_from_principal, full, hardy, hardy_principal};
use crate::circle::{CircleOp, ClassicalSymbol, HomComponent, TrigPoly};
use crate::error::Result;
use crate::scalar::{cq, cq_int, cq_to_c64, q_frac, Cq, QMat};
use crate::sg::{deg, Basis, BiOrder, SgSymbol};

use super::winding::winding_oracle;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Gaussian rational with real and imaginary parts in `{−n/d, …, n/d}`.
pub fn small_cq(rng: &mut impl Rng, n: i64, d: i64) -> Cq {
    cq(q_frac(rng.gen_range(-n..=n), d), q_frac(rng.gen_range(-n..=n), d))
}

fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize, n: i64, d: i64) -> QMat {
    QMat::from_fn(rows, cols, |_, _| small_cq(rng, n, d))
}

/// Trigonometric polynomial with modes `−k..=k` and entries in `[−n/d, n/d]`.
pub fn random_trig(rng: &mut impl Rng, rows: usize, cols: usize, k: i64, n: i64, d: i64) -> TrigPoly {
    TrigPoly::from_coeffs(rows, cols, (-k..=k).map(|m| (m, random_matrix(rng, rows, cols, n, d))).collect::<Vec<_>>())
}

/// Minimum of `|det f|` over a uniform grid.
pub fn det_margin(f: &TrigPoly, grid: usize) -> f64 {
    let det = f.det();
    (0..grid)
        .map(|j| det.eval(2.0 * PI * j as f64 / grid as f64)[(0, 0)].norm())
        .fold(f64::INFINITY, f64::min)
}

/// Gaussian rational root with `|z| ≤ 0.6` or `|z| ≥ 1.7`.
fn root_off_circle(rng: &mut impl Rng) -> Cq {
    let inside = rng.gen_bool(0.5);
    loop {
        let z = if inside { small_cq(rng, 6, 10) } else { small_cq(rng, 8, 2) };
        let r = cq_to_c64(&z).norm();
        if (inside && r <= 0.6) || (!inside && r >= 1.7) {
            return z;
        }
    }
}

/// `c e^{−iaθ} Π (e^{iθ} − z_j)` with modes in `−k..=k` and roots off the
/// annulus `0.6 < |z| < 1.7`.
fn factored_scalar(rng: &mut impl Rng, k: i64) -> TrigPoly {
    let roots = rng.gen_range(0..=2 * k);
    let shift = rng.gen_range((roots - k).max(0)..=roots.min(k));
    let c = [cq_int(1, 0), cq_int(2, 0), cq_int(0, 1), cq_int(1, 1)].choose(rng).unwrap().clone();
    let mut f = TrigPoly::scalar(&[(-shift, c)]);
    for _ in 0..roots {
        let z = root_off_circle(rng);
        f = f.mul(&TrigPoly::scalar(&[(1, cq_int(1, 0)), (0, -z)]));
    }
    f
}

/// Invertible loop of bandwidth at most `k` with `|det f| > 0.1` on 256
/// points. Scalar loops are products of linear factors whose roots stay
/// off the annulus `0.6 < |z| < 1.7`, so null vectors of the finite
/// sections decay at least like `0.6^n`; matrix loops are
/// `U [[f₁, g], [0, f₂]] V` with constant invertible `U`, `V`.
pub fn random_loop(rng: &mut impl Rng, dim: usize, k: i64) -> TrigPoly {
    loop {
        let f = if dim == 1 {
            factored_scalar(rng, k)
        } else {
            let mut m = TrigPoly::zero(dim, dim);
            for j in 0..dim {
                for (n, c) in factored_scalar(rng, k).coeffs() {
                    let mut e = QMat::zeros(dim, dim);
                    e.set(j, j, c.get(0, 0).clone());
                    m.add_term(*n, &e);
                }
                for i in 0..j {
                    for (n, c) in random_trig(rng, 1, 1, k, 2, 4).coeffs() {
                        let mut e = QMat::zeros(dim, dim);
                        e.set(i, j, c.get(0, 0).clone());
                        m.add_term(*n, &e);
                    }
                }
            }
            let u = invertible_constant(rng, dim);
            let v = invertible_constant(rng, dim);
            TrigPoly::constant(u).mul(&m).mul(&TrigPoly::constant(v))
        };
        if det_margin(&f, 256) > 0.1 && winding_oracle(&f, 256).is_ok() {
            return f;
        }
    }
}

fn invertible_constant(rng: &mut impl Rng, dim: usize) -> QMat {
    loop {
        let m = random_matrix(rng, dim, dim, 2, 2);
        if cq_to_c64(&m.determinant()).norm() >= 0.5 {
            return m;
        }
    }
}

/// A 2×2 rational unitary `[[a, −b̄], [b, ā]]` from a Pythagorean triple.
pub fn rational_unitary(rng: &mut impl Rng) -> QMat {
    let (p, q, r) = *[(3, 4, 5), (5, 12, 13), (8, 15, 17)].choose(rng).unwrap();
    let (p, q) = if rng.gen() { (p, q) } else { (q, p) };
    let a = match rng.gen_range(0..4) {
        0 => cq(q_frac(p, r), q_frac(0, 1)),
        1 => cq(q_frac(0, 1), q_frac(p, r)),
        2 => cq(q_frac(-p, r), q_frac(0, 1)),
        _ => cq(q_frac(0, 1), q_frac(-p, r)),
    };
    let b = if rng.gen() {
        cq(q_frac(q, r), q_frac(0, 1))
    } else {
        cq(q_frac(0, 1), q_frac(q, r))
    };
    let mut u = QMat::zeros(2, 2);
    u.set(0, 0, a.clone());
    u.set(0, 1, -b.conj());
    u.set(1, 0, b);
    u.set(1, 1, a.conj());
    u
}

/// `U diag(e^{ik_jθ}) V` with rational unitaries `U`, `V` and `k_j ∈ [−3, 3]`.
pub fn inner_monomial(rng: &mut impl Rng, dim: usize) -> TrigPoly {
    if dim == 1 {
        let units = [cq_int(1, 0), cq_int(-1, 0), cq_int(0, 1), cq(q_frac(3, 5), q_frac(4, 5))];
        let c = units.choose(rng).unwrap().clone();
        return TrigPoly::scalar(&[(rng.gen_range(-3..=3), c)]);
    }
    let u = rational_unitary(rng);
    let v = rational_unitary(rng);
    let mut d = TrigPoly::zero(2, 2);
    for j in 0..2 {
        let mut e = QMat::zeros(2, 2);
        e.set(j, j, cq_int(1, 0));
        d.add_term(rng.gen_range(-3..=3), &e);
    }
    TrigPoly::constant(u).mul(&d).mul(&TrigPoly::constant(v))
}

/// Invertible principal data with monomial determinant:
/// `L diag(c_j e^{ik_jθ}) R` with unit triangular trigonometric `L`, `R`.
pub fn monomial_det_loop(rng: &mut impl Rng, dim: usize) -> TrigPoly {
    let mut d = TrigPoly::zero(dim, dim);
    for j in 0..dim {
        let mut e = QMat::zeros(dim, dim);
        let c = [cq_int(1, 0), cq_int(2, 0), cq_int(0, 1), cq_int(-1, 1)].choose(rng).unwrap().clone();
        e.set(j, j, c);
        d.add_term(rng.gen_range(-2..=2), &e);
    }
    if dim == 1 {
        return d;
    }
    let l = unit_triangular(rng, true);
    let r = unit_triangular(rng, false);
    l.mul(&d).mul(&r)
}

fn unit_triangular(rng: &mut impl Rng, lower: bool) -> TrigPoly {
    let mut t = TrigPoly::identity(2);
    let mut e = QMat::zeros(2, 2);
    let (i, j) = if lower { (1, 0) } else { (0, 1) };
    e.set(i, j, cq_int(1, 0));
    for (m, c) in random_trig(rng, 1, 1, 1, 2, 2).coeffs() {
        t.add_term(*m, &e.scale(c.get(0, 0)));
    }
    t
}

/// Symbol of order `order` whose components below the principal one are
/// random trigonometric polynomials of bandwidth ≤ 1.
pub fn with_random_lower(rng: &mut impl Rng, principal: HomComponent, order: i64, depth: usize) -> ClassicalSymbol {
    let (r, c) = principal.plus.dims();
    let mut comps = vec![principal];
    for _ in 1..depth {
        let plus = random_trig(rng, r, c, 1, 2, 4);
        let minus = random_trig(rng, r, c, 1, 2, 4);
        comps.push(HomComponent::new(plus, minus));
    }
    ClassicalSymbol::new(order, comps).expect("well-formed components")
}

/// Fully random symbol with bandwidth ≤ `k` in every component.
pub fn random_symbol(rng: &mut impl Rng, order: i64, rows: usize, cols: usize, depth: usize, k: i64) -> ClassicalSymbol {
    let comps = (0..depth)
        .map(|_| HomComponent::new(random_trig(rng, rows, cols, k, 4, 4), random_trig(rng, rows, cols, k, 4, 4)))
        .collect();
    ClassicalSymbol::new(order, comps).expect("well-formed components")
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub label: String,
    pub element: ToeplitzElement<CircleOp>,
}

/// Elliptic Toeplitz element whose principal part inverts exactly: Hardy
/// or full projections, order in `{−1, 0, 1}`, random lower components.
pub fn bootstrap_instance(rng: &mut impl Rng, depth: usize, exact_modes: usize) -> Result<Instance> {
    let dim = rng.gen_range(1..=2);
    let order = rng.gen_range(-1..=1);
    let use_hardy = rng.gen_bool(0.5);
    let plus = monomial_det_loop(rng, dim);
    let minus = if use_hardy {
        TrigPoly::zero(dim, dim)
    } else {
        monomial_det_loop(rng, dim)
    };
    let sym = with_random_lower(rng, HomComponent::new(plus, minus), order, depth);
    let p = if use_hardy {
        hardy(dim, depth, exact_modes)?
    } else {
        full(dim, depth, exact_modes)?
    };
    let a = CircleOp::from_symbol(sym, exact_modes);
    let element = toeplitz_compress(&a, &p, &p)?;
    Ok(Instance {
        label: format!(
            "{dim}x{dim} order {order} on {}",
            if use_hardy { "hardy" } else { "full" }
        ),
        element,
    })
}

/// `T_f` on `H²⊗C^dim` for an inner monomial `f`.
pub fn route_instance(rng: &mut impl Rng, depth: usize, exact_modes: usize) -> Result<Instance> {
    let dim = rng.gen_range(1..=2);
    let f = inner_monomial(rng, dim);
    let p = hardy(dim, depth, exact_modes)?;
    let element = toeplitz_compress(&CircleOp::multiplication(f.clone(), depth, exact_modes), &p, &p)?;
    Ok(Instance {
        label: format!("inner monomial {dim}x{dim}, bandwidth {}", f.bandwidth()),
        element,
    })
}

/// Hardy principal data plus an order −1 perturbation whose component of
/// order `−j` has entries of modulus at most `2^{1/2}/(20·2^j)`, completed by
/// Newton–Schulz. The decay keeps the low modes of the section, where the
/// expansion does not converge, close to a projection.
pub fn perturbed_hardy(rng: &mut impl Rng, dim: usize, depth: usize, exact_modes: usize) -> Result<Completion<CircleOp>> {
    let mut e = ClassicalSymbol::zero(0, dim, dim, depth);
    for j in 1..depth {
        let d = 20 << j;
        *e.component_mut(j) = HomComponent::new(random_trig(rng, dim, dim, 1, 1, d), random_trig(rng, dim, dim, 1, 1, d));
    }
    complete_from_principal(hardy_principal(dim), Some(&e), depth, exact_modes)
}

/// Random SG symbol of the given bi-order whose terms use degrees down to
/// three below the order, with both parities.
pub fn random_sg(rng: &mut impl Rng, order: BiOrder, dim: usize, depth: usize) -> SgSymbol {
    let mut s = SgSymbol::zero(order, dim, dim, depth);
    let terms = rng.gen_range(2..=5);
    for t in 0..terms {
        // keep the corner populated so the three symbols are nontrivial
        let (dx, dxi) = if t == 0 { (0, 0) } else { (rng.gen_range(0..=2), rng.gen_range(0..=2)) };
        let bx = Basis {
            degree: deg(order.x - dx),
            odd: rng.gen(),
        };
        let bxi = Basis {
            degree: deg(order.xi - dxi),
            odd: rng.gen(),
        };
        let m = random_matrix(rng, dim, dim, 3, 2);
        s.add_term(bx, bxi, &m).expect("degrees within the bi-order");
    }
    s
}
