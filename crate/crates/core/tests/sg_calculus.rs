use std::collections::BTreeMap;

use num_traits::{One, Zero};
use proptest::prelude::*;
use toeplitz_core::algebra::{toeplitz_compress, BootstrapOptions, Calculus, ProjectionHandle};
use toeplitz_core::error::Branch;
use toeplitz_core::lab::instances::{random_sg, rng};
use toeplitz_core::scalar::{cq_int, Cq, QMat};
use toeplitz_core::sg::parametrix::{constant, sg_order_reduction};
use toeplitz_core::sg::{deg, sg_check_ellipticity, three_symbols, Basis, BiOrder, Deg, OneVar, SgSymbol};

/// Polynomial `Σ c_{jk} x^j ξ^k`.
type Poly2 = BTreeMap<(usize, usize), Cq>;

/// Basis elements that are polynomials: `1`, `x`, `1 + x²`, `x + x³`.
fn polynomial_basis(k: usize) -> Basis {
    match k {
        0 => Basis::even(deg(0)),
        1 => Basis::odd(deg(1)),
        2 => Basis::even(deg(2)),
        _ => Basis::odd(deg(3)),
    }
}

/// Coefficients of a basis element as a polynomial, if it is one.
fn as_poly(b: &Basis) -> Vec<Cq> {
    assert_eq!(*b.degree.denom(), 1, "fractional degree {b}");
    let r = *b.degree.numer();
    let (odd, half) = if b.odd { (true, (r - 1) / 2) } else { (false, r / 2) };
    assert!(r >= 0 && (r % 2 == 1) == odd, "{b} is not a polynomial");
    // (1 + x²)^half, times x when odd
    let mut p = vec![Cq::one()];
    for _ in 0..half {
        let mut q = vec![Cq::zero(); p.len() + 2];
        for (i, c) in p.iter().enumerate() {
            q[i] = q[i].clone() + c.clone();
            q[i + 2] = q[i + 2].clone() + c.clone();
        }
        p = q;
    }
    if odd {
        p.insert(0, Cq::zero());
    }
    p
}

fn to_poly2(a: &SgSymbol) -> Poly2 {
    let mut out = Poly2::new();
    for ((bx, bxi), m) in a.terms() {
        let c = m.get(0, 0).clone();
        for (j, px) in as_poly(bx).iter().enumerate() {
            for (k, pxi) in as_poly(bxi).iter().enumerate() {
                let e = out.entry((j, k)).or_insert_with(Cq::zero);
                *e = e.clone() + c.clone() * px.clone() * pxi.clone();
            }
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

/// `u ↦ Σ c_{jk} x^j D^k u` with `D = −i d/dx` on polynomials.
fn apply(a: &Poly2, u: &[Cq]) -> Vec<Cq> {
    let minus_i = Cq::new(Zero::zero(), -num_rational::BigRational::one());
    let mut out = vec![Cq::zero(); u.len() + a.keys().map(|k| k.0).max().unwrap_or(0) + 1];
    for (&(j, k), c) in a {
        let mut v = u.to_vec();
        for _ in 0..k {
            v = (1..v.len()).map(|i| v[i].clone() * Cq::from(num_rational::BigRational::from_integer((i as i64).into())) * minus_i.clone()).collect();
        }
        for (i, vi) in v.iter().enumerate() {
            out[i + j] = out[i + j].clone() + c.clone() * vi.clone();
        }
    }
    while out.last().is_some_and(|c| c.is_zero()) {
        out.pop();
    }
    out
}

fn polynomial_symbol(terms: &[(usize, usize, i64, i64)], depth: usize) -> SgSymbol {
    let top = |k: usize| *polynomial_basis(k).degree.numer();
    let order = BiOrder::new(
        terms.iter().map(|t| top(t.1)).max().unwrap(),
        terms.iter().map(|t| top(t.0)).max().unwrap(),
    );
    let mut s = SgSymbol::zero(order, 1, 1, depth);
    for &(ix, ixi, re, im) in terms {
        s.add_term(polynomial_basis(ix), polynomial_basis(ixi), &QMat::scalar(cq_int(re, im)))
            .unwrap();
    }
    s
}

fn terms_strategy() -> impl Strategy<Value = Vec<(usize, usize, i64, i64)>> {
    prop::collection::vec((0usize..4, 0usize..4, -3i64..=3, -3i64..=3), 1..4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// `Op(a#b) u = Op(a) Op(b) u` on monomials, for polynomial symbols
    /// where the expansion terminates.
    #[test]
    fn composition_matches_operator_product(ta in terms_strategy(), tb in terms_strategy()) {
        let depth = 8;
        let a = polynomial_symbol(&ta, depth);
        let b = polynomial_symbol(&tb, depth);
        let ab = a.compose(&b).unwrap();
        let (pa, pb, pab) = (to_poly2(&a), to_poly2(&b), to_poly2(&ab));
        for n in 0..6 {
            let mut u = vec![Cq::zero(); n + 1];
            u[n] = Cq::one();
            prop_assert_eq!(apply(&pab, &u), apply(&pa, &apply(&pb, &u)), "u = x^{}", n);
        }
    }

    #[test]
    fn three_symbols_are_multiplicative(seed in any::<u64>(), o in prop::array::uniform4(-1i64..=1)) {
        let mut r = rng(seed);
        let a = random_sg(&mut r, BiOrder::new(o[0], o[1]), 2, 4);
        let b = random_sg(&mut r, BiOrder::new(o[2], o[3]), 2, 4);
        let ab = a.compose(&b).unwrap();
        prop_assert_eq!(three_symbols(&ab), three_symbols(&a).product(&three_symbols(&b)).unwrap());
        prop_assert!(three_symbols(&ab).corners_consistent());
    }

    #[test]
    fn corners_are_consistent(seed in any::<u64>(), xi in -2i64..=2, x in -2i64..=2) {
        let mut r = rng(seed);
        let a = random_sg(&mut r, BiOrder::new(xi, x), 2, 4);
        prop_assert!(three_symbols(&a).corners_consistent());
        prop_assert!(three_symbols(&a.adjoint()).corners_consistent());
    }

    #[test]
    fn three_symbols_of_adjoint_are_pointwise_adjoints(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_sg(&mut r, BiOrder::new(1, 1), 2, 4);
        let s = three_symbols(&a);
        let t = three_symbols(&a.adjoint());
        for b in Branch::BOTH {
            prop_assert_eq!(t.interior(b), &s.interior(b).adjoint());
            prop_assert_eq!(t.exit(b), &s.exit(b).adjoint());
            for c in Branch::BOTH {
                prop_assert_eq!(t.corner(b, c), &s.corner(b, c).adjoint());
            }
        }
    }

    #[test]
    fn lower_order_terms_leave_three_symbols_alone(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_sg(&mut r, BiOrder::new(1, 1), 2, 4);
        let c = random_sg(&mut r, BiOrder::new(0, 0), 2, 4).lift(BiOrder::new(1, 1)).unwrap();
        prop_assert_eq!(three_symbols(&a.add(&c).unwrap()), three_symbols(&a));
    }
}

fn sample_points() -> Vec<f64> {
    let mut r = rng(5);
    (0..100)
        .map(|_| {
            use rand::Rng;
            let x: f64 = r.gen_range(-1.0..1.0);
            x * 10f64.powf(r.gen_range(0.0..2.0))
        })
        .collect()
}

fn close(got: f64, want: f64) -> bool {
    (got - want).abs() <= 1e-12 * want.abs().max(1.0)
}

/// Closed forms, independent of the basis rewriting rules.
fn value(b: &Basis, x: f64) -> f64 {
    let r = *b.degree.numer() as f64 / *b.degree.denom() as f64;
    let w = (1.0 + x * x).sqrt();
    if b.odd {
        x * w.powf(r - 1.0)
    } else {
        w.powf(r)
    }
}

fn slope(b: &Basis, x: f64) -> f64 {
    let r = *b.degree.numer() as f64 / *b.degree.denom() as f64;
    let w2 = 1.0 + x * x;
    if b.odd {
        w2.powf((r - 1.0) / 2.0) + (r - 1.0) * x * x * w2.powf((r - 3.0) / 2.0)
    } else {
        r * x * w2.powf((r - 2.0) / 2.0)
    }
}

#[test]
fn one_variable_family_is_closed_under_products_and_derivatives() {
    let degrees: Vec<Deg> = [-3, -2, -1, 0, 1, 2, 3]
        .iter()
        .map(|&n| deg(n))
        .chain([Deg::new(1, 2), Deg::new(-3, 2)])
        .collect();
    let bases: Vec<Basis> = degrees.iter().flat_map(|&d| [Basis::even(d), Basis::odd(d)]).collect();
    let points = sample_points();
    for b in &bases {
        let f = OneVar::scalar(&[(*b, Cq::one())]);
        let df = f.derivative();
        for &x in &points {
            assert!(close(f.eval(x)[(0, 0)].re, value(b, x)), "{b} at {x}");
            assert!(close(df.eval(x)[(0, 0)].re, slope(b, x)), "d {b} at {x}");
        }
        for c in &bases {
            let g = f.mul(&OneVar::scalar(&[(*c, Cq::one())])).unwrap();
            for &x in &points {
                assert!(close(g.eval(x)[(0, 0)].re, value(b, x) * value(c, x)), "{b} * {c} at {x}");
            }
        }
    }
}

#[test]
fn xi_after_x_is_x_xi_minus_i() {
    let xi = polynomial_symbol(&[(0, 1, 1, 0)], 3);
    let x = polynomial_symbol(&[(1, 0, 1, 0)], 3);
    let p = to_poly2(&xi.compose(&x).unwrap());
    let mut expected = Poly2::new();
    expected.insert((1, 1), Cq::one());
    expected.insert((0, 0), cq_int(0, -1));
    assert_eq!(p, expected);
}

/// `Q = P + P K (1−P)` for a constant `P` keeps every principal symbol of
/// `P` and is exactly idempotent.
#[test]
fn ellipticity_is_blind_to_lower_order_projection_changes() {
    let depth = 4;
    let diag = QMat::from_fn(2, 2, |i, j| cq_int((i == 0 && j == 0) as i64, 0));
    let p = constant(diag, depth).unwrap();
    let q_op = p.complement().unwrap();
    let mut r = rng(21);
    let mut verdicts = Vec::new();
    for s in 0..8 {
        let k = random_sg(&mut r, BiOrder::new(-1, -1), 2, depth);
        let n = p.op().compose(&k).unwrap().compose(q_op.op()).unwrap();
        let q = ProjectionHandle::new(p.op().add(&n.lift(BiOrder::new(0, 0)).unwrap()).unwrap()).unwrap();
        let a = if s == 0 {
            // x alone vanishes at the origin
            polynomial_symbol(&[(1, 0, 1, 0)], depth).lift(BiOrder::new(1, 1)).unwrap()
        } else {
            random_sg(&mut r, BiOrder::new(1, 1), 1, depth)
        };
        let a = block_first(&a);
        let on_p = sg_check_ellipticity(&toeplitz_compress(&a, &p, &p).unwrap(), 65, 65, 1e8).unwrap();
        let on_q = sg_check_ellipticity(&toeplitz_compress(&a, &q, &q).unwrap(), 65, 65, 1e8).unwrap();
        assert_eq!(on_p.is_elliptic(), on_q.is_elliptic(), "instance {s}");
        verdicts.push(on_p.is_elliptic());
    }
    assert!(!verdicts[0]);
}

/// `diag(a, 0)` plus an arbitrary lower-left block.
fn block_first(a: &SgSymbol) -> SgSymbol {
    let mut out = SgSymbol::zero(a.order(), 2, 2, a.depth());
    for ((bx, bxi), m) in a.terms() {
        let mut e = QMat::zeros(2, 2);
        e.set(0, 0, m.get(0, 0).clone());
        e.set(1, 0, m.get(0, 0).clone());
        out.add_term(*bx, *bxi, &e).unwrap();
    }
    out
}

#[test]
fn order_reductions() {
    let opts = BootstrapOptions { depth: 5, zero_tol: 0.0 };
    let id = sg_order_reduction(BiOrder::new(0, 0), 1, opts).unwrap();
    assert_eq!(id.forward, SgSymbol::identity(1, 5));
    assert_eq!(id.inverse, SgSymbol::identity(1, 5));

    let r11 = sg_order_reduction(BiOrder::new(1, 1), 2, opts).unwrap();
    assert_eq!(r11.initial_residual_levels, 1);
    assert!(r11.parametrix.is_certified());

    // ξ-only multipliers compose without corrections
    let r20 = sg_order_reduction(BiOrder::new(2, 0), 1, opts).unwrap();
    assert!(r20.initial_residual_levels >= 5);
    let one = r20.forward.compose(&r20.inverse).unwrap();
    assert_eq!(one, SgSymbol::identity(1, 5));
}
