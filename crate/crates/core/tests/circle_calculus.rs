use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use toeplitz_core::algebra::{
    complete_projection, fredholm_parametrix, parametrix_bootstrap, toeplitz_compress, BootstrapOptions, Calculus,
    CandidateKind, ProjectionHandle,
};
use toeplitz_core::certificate::Verdict;
use toeplitz_core::circle::inverse::candidate;
use toeplitz_core::circle::projections::{full, hardy, twisted_line};
use toeplitz_core::circle::{
    check_ellipticity, CircleOp, ClassicalSymbol, HomComponent, PointwiseSolver, SmoothingKernel, TrigPoly,
};
use toeplitz_core::error::{CalcError, Witness};
use toeplitz_core::lab::galerkin_matrix;
use toeplitz_core::lab::instances::{random_symbol, random_trig, rng, small_cq};
use toeplitz_core::lab::verify::witness;
use toeplitz_core::scalar::{cq, cq_int, cq_to_c64, q_frac, QMat};

const EM: usize = 64;

fn op(sym: ClassicalSymbol) -> CircleOp {
    CircleOp::from_symbol(sym, EM)
}

fn scalar_trig(terms: &[(i64, (i64, i64))]) -> TrigPoly {
    TrigPoly::scalar(&terms.iter().map(|&(n, (re, im))| (n, cq_int(re, im))).collect::<Vec<_>>())
}

fn product(a: &HomComponent, b: &HomComponent) -> HomComponent {
    HomComponent::new(a.plus.mul(&b.plus), a.minus.mul(&b.minus))
}

fn exact(depth: usize) -> BootstrapOptions {
    BootstrapOptions { depth, zero_tol: 0.0 }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn composition_is_associative_at_retained_orders(
        seed in any::<u64>(),
        dims in prop::array::uniform4(1usize..=2),
        orders in prop::array::uniform3(-1i64..=1),
    ) {
        let mut r = rng(seed);
        let depth = 3;
        let a = op(random_symbol(&mut r, orders[0], dims[0], dims[1], depth, 1));
        let b = op(random_symbol(&mut r, orders[1], dims[1], dims[2], depth, 1));
        let c = op(random_symbol(&mut r, orders[2], dims[2], dims[3], depth, 1));
        let left = a.compose(&b).unwrap().compose(&c).unwrap();
        let right = a.compose(&b.compose(&c).unwrap()).unwrap();
        prop_assert_eq!(left.order(), orders.iter().sum::<i64>());
        prop_assert!(left.symbol().sub_levels(right.symbol()) >= depth);
    }

    #[test]
    fn principal_symbol_is_multiplicative(seed in any::<u64>(), mu in -2i64..=2, nu in -2i64..=2) {
        let mut r = rng(seed);
        let a = op(random_symbol(&mut r, mu, 2, 2, 3, 2));
        let b = op(random_symbol(&mut r, nu, 2, 2, 3, 2));
        let ab = a.compose(&b).unwrap();
        prop_assert_eq!(ab.symbol().principal(), &product(a.symbol().principal(), b.symbol().principal()));
    }

    #[test]
    fn principal_symbol_of_adjoint_is_pointwise_adjoint(seed in any::<u64>(), mu in -2i64..=2) {
        let mut r = rng(seed);
        let a = op(random_symbol(&mut r, mu, 2, 1, 4, 2));
        let p = a.symbol().principal();
        let expected = HomComponent::new(p.plus.adjoint(), p.minus.adjoint());
        let adj = a.adjoint();
        prop_assert_eq!(adj.symbol().principal(), &expected);
        // the adjoint is an involution at every retained order
        let twice = a.adjoint().adjoint();
        prop_assert!(twice.symbol().sub_levels(a.symbol()) >= 4);
    }

    #[test]
    fn smoothing_operators_have_zero_symbol(seed in any::<u64>(), mu in -1i64..=1) {
        let mut r = rng(seed);
        let mut k = SmoothingKernel::new(1, 1);
        for m in -3..=3 {
            let z = cq_to_c64(&small_cq(&mut r, 3, 4));
            k.add_block(m, 2 - m, &nalgebra::DMatrix::from_element(1, 1, z));
        }
        let s = CircleOp::smoothing(k, mu, 3, EM);
        prop_assert!(s.symbol().is_zero());
        let a = op(random_symbol(&mut r, 1, 1, 1, 3, 1));
        prop_assert!(s.compose(&a).unwrap().symbol().is_zero());
        prop_assert!(a.compose(&s).unwrap().symbol().is_zero());
    }

    #[test]
    fn compression_is_idempotent(seed in any::<u64>(), which in 0usize..3) {
        let mut r = rng(seed);
        let depth = 4;
        let (p, dim) = match which {
            0 => (hardy(1, depth, EM).unwrap(), 1),
            1 => (twisted_line(depth, EM).unwrap(), 2),
            _ => (full(2, depth, EM).unwrap(), 2),
        };
        let a = op(random_symbol(&mut r, 0, dim, dim, depth, 1));
        let once = toeplitz_compress(&a, &p, &p).unwrap();
        let twice = toeplitz_compress(once.inner(), &p, &p).unwrap();
        prop_assert!(twice.inner().symbol().sub_levels(once.inner().symbol()) >= depth);
    }
}

trait SubLevels {
    fn sub_levels(&self, rhs: &Self) -> usize;
}

impl SubLevels for ClassicalSymbol {
    fn sub_levels(&self, rhs: &Self) -> usize {
        self.add(&rhs.scale(&cq_int(-1, 0))).unwrap().vanishing_levels(0.0)
    }
}

#[test]
fn compressing_identity_by_hardy_gives_hardy() {
    let p = hardy(1, 5, EM).unwrap();
    let t = toeplitz_compress(&CircleOp::identity(1, 5, EM), &p, &p).unwrap();
    assert_eq!(t.inner().symbol(), p.op().symbol());
    let g = galerkin_matrix(t.inner(), 16).unwrap().matrix;
    assert_eq!(g, galerkin_matrix(p.op(), 16).unwrap().matrix);
}

#[test]
fn full_projection_leaves_element_unchanged() {
    let mut r = rng(3);
    let a = op(random_symbol(&mut r, 1, 2, 2, 4, 2));
    let one = full(2, 4, EM).unwrap();
    let t = toeplitz_compress(&a, &one, &one).unwrap();
    assert_eq!(t.inner().symbol(), a.symbol());
}

/// `Gal(T_f)` against Fourier coefficients of `f` obtained by quadrature on
/// 64 points, cut to nonnegative modes.
#[test]
fn shift_section_matches_fourier_quadrature() {
    let f = scalar_trig(&[(1, (1, 0))]);
    let p = hardy(1, 5, EM).unwrap();
    let t = toeplitz_compress(&CircleOp::multiplication(f.clone(), 5, EM), &p, &p).unwrap();
    let g = galerkin_matrix(t.inner(), 32).unwrap();
    let samples = 64;
    let coeff = |k: i64| -> Complex64 {
        (0..samples)
            .map(|j| {
                let th = 2.0 * PI * j as f64 / samples as f64;
                f.eval(th)[(0, 0)] * Complex64::from_polar(1.0, -(k as f64) * th)
            })
            .sum::<Complex64>()
            / samples as f64
    };
    let (rows, cols) = g.dims();
    for i in 0..rows {
        for j in 0..cols {
            let (m, n) = (g.row_mode(i), g.col_mode(j));
            let expected = if m >= 0 && n >= 0 { coeff(m - n) } else { Complex64::default() };
            assert!((g.matrix[(i, j)] - expected).norm() < 1e-14, "entry ({m}, {n})");
            if m >= 0 && n >= 0 && m == n + 1 {
                assert_eq!(g.matrix[(i, j)], Complex64::new(1.0, 0.0));
            }
        }
    }
}

#[test]
fn projection_candidate_is_its_own_parametrix() {
    let p = hardy(2, 5, EM).unwrap();
    let t = toeplitz_compress(p.op(), &p, &p).unwrap();
    let b = parametrix_bootstrap(&t, p.op(), p.op(), CandidateKind::Toeplitz, exact(5)).unwrap();
    assert!(b.is_certified());
    assert!(b.left_residual.symbol().is_zero());
    assert!(b.right_residual.symbol().is_zero());
    assert_eq!(b.b.inner().symbol(), p.op().symbol());
}

/// `(D + 1)⁻¹ = Σ (−1)^k ξ^{−1−k}` from the candidate `χ(ξ)/ξ`; on the minus
/// branch `ξ^{−1−k} = (−1)^{1+k} |ξ|^{−1−k}`.
#[test]
fn derivative_plus_one_bootstrap_is_the_geometric_series() {
    let depth = 5;
    let d = op(ClassicalSymbol::derivative(1, depth));
    let a = d.add(&CircleOp::identity(1, depth, EM).lift(1).unwrap()).unwrap();
    let one = full(1, depth, EM).unwrap();
    let t = toeplitz_compress(&a, &one, &one).unwrap();
    let mut inv_xi = ClassicalSymbol::zero(-1, 1, 1, depth);
    *inv_xi.component_mut(0) = HomComponent::new(scalar_trig(&[(0, (1, 0))]), scalar_trig(&[(0, (-1, 0))]));
    let cand = op(inv_xi);
    let p = parametrix_bootstrap(&t, &cand, &cand, CandidateKind::FullAlgebra, exact(depth)).unwrap();
    assert!(p.is_certified());
    let sym = p.b.inner().symbol();
    for k in 0..depth {
        let c = &sym.components()[k];
        let sign = if k % 2 == 0 { 1 } else { -1 };
        assert_eq!(c.plus, scalar_trig(&[(0, (sign, 0))]), "plus component {k}");
        assert_eq!(c.minus, scalar_trig(&[(0, (-1, 0))]), "minus component {k}");
    }
    // Fourier-diagonal oracle: the parametrix approximates 1/(n+1)
    let g = galerkin_matrix(p.b.inner(), 64).unwrap();
    for i in 0..g.dims().0 {
        let n = g.row_mode(i);
        if n.abs() >= 8 {
            let err = (g.matrix[(i, i)] - Complex64::new(1.0 / (n as f64 + 1.0), 0.0)).norm();
            assert!(err <= 2.0 * (n.abs() as f64).powi(-1 - depth as i32), "n = {n}: {err}");
        }
    }
}

#[test]
fn sampled_candidate_for_two_plus_shift_is_bootstrapped() {
    let depth = 5;
    let f = scalar_trig(&[(0, (2, 0)), (1, (1, 0))]);
    let p = hardy(1, depth, EM).unwrap();
    let t = toeplitz_compress(&CircleOp::multiplication(f, depth, EM), &p, &p).unwrap();
    let (c, approximate) = candidate(t.inner(), t.p0(), t.p1()).unwrap();
    assert!(approximate, "1/f is not a trigonometric polynomial");
    let b = parametrix_bootstrap(&t, &c, &c, CandidateKind::FullAlgebra, BootstrapOptions::default()).unwrap();
    assert!(b.initial_residual_levels >= 1);
    assert!(b.is_certified());
}

#[test]
fn witness_of_orthogonal_projection_is_identity() {
    let p = hardy(1, 5, EM).unwrap();
    let t = toeplitz_compress(p.op(), &p, &p).unwrap();
    let w = witness(&t).unwrap();
    assert_eq!(w.symbol(), &ClassicalSymbol::identity(1, 5));
    let b = fredholm_parametrix(&t, &PointwiseSolver::default(), exact(5)).unwrap();
    assert!(b.b.inner().symbol().sub_levels(p.op().symbol()) >= 5);
}

#[test]
fn fredholm_route_for_shift() {
    let p = hardy(1, 5, EM).unwrap();
    let a = CircleOp::multiplication(scalar_trig(&[(1, (1, 0))]), 5, EM);
    let t = toeplitz_compress(&a, &p, &p).unwrap();
    let b = fredholm_parametrix(&t, &PointwiseSolver::default(), BootstrapOptions::default()).unwrap();
    assert!(b.left_residual_levels >= 5);
    assert!(b.is_certified());
}

#[test]
fn fredholm_route_rejects_sine_at_zero() {
    let p = hardy(1, 5, EM).unwrap();
    let sine = TrigPoly::scalar(&[(1, cq(q_frac(0, 1), q_frac(-1, 2))), (-1, cq(q_frac(0, 1), q_frac(1, 2)))]);
    let t = toeplitz_compress(&CircleOp::multiplication(sine, 5, EM), &p, &p).unwrap();
    match fredholm_parametrix(&t, &PointwiseSolver::default(), BootstrapOptions::default()) {
        Err(CalcError::NotElliptic { witness: Witness::Circle { theta, .. } }) => assert!(theta.abs() < 1e-12),
        other => panic!("expected a witness at theta = 0, got {other:?}"),
    }
}

/// `Q = P + P K (1−P)` has the principal part of `P` and is exactly
/// idempotent since `(1−P) P = 0`.
fn perturbed(p: &ProjectionHandle<CircleOp>, k: &CircleOp) -> ProjectionHandle<CircleOp> {
    let q = p.complement().unwrap();
    let n = p.op().compose(k).unwrap().compose(q.op()).unwrap();
    ProjectionHandle::new(p.op().add(&n.lift(0).unwrap()).unwrap()).unwrap()
}

#[test]
fn ellipticity_is_blind_to_lower_order_projection_changes() {
    let depth = 4;
    let mut r = rng(11);
    let p = hardy(1, depth, EM).unwrap();
    let sine = scalar_trig(&[(1, (1, 0)), (-1, (-1, 0))]);
    let mut verdicts = Vec::new();
    for s in 0..8 {
        let k = op(random_symbol(&mut r, -1, 1, 1, depth, 1));
        let q = perturbed(&p, &k);
        let f = if s == 0 { sine.clone() } else { random_trig(&mut r, 1, 1, 2, 2, 3) };
        let a = CircleOp::multiplication(f, depth, EM);
        let on_p = check_ellipticity(&toeplitz_compress(&a, &p, &p).unwrap(), 256, 1e8).unwrap();
        let on_q = check_ellipticity(&toeplitz_compress(&a, &q, &q).unwrap(), 256, 1e8).unwrap();
        assert_eq!(on_p.is_elliptic(), on_q.is_elliptic(), "instance {s}");
        verdicts.push(on_p.is_elliptic());
    }
    assert!(!verdicts[0], "sine is not elliptic");
    assert!(matches!(
        check_ellipticity(&toeplitz_compress(&CircleOp::identity(1, depth, EM), &p, &p).unwrap(), 64, 1e8).unwrap().verdict,
        Verdict::Elliptic
    ));
}

#[test]
fn completion_of_exact_data_needs_no_iteration() {
    let p = twisted_line(4, EM).unwrap();
    let c = complete_projection(p.op()).unwrap();
    assert_eq!(c.iterations(), 0);
    let m = QMat::from_fn(2, 2, |i, j| cq_int((i == 0 && j == 0) as i64, 0));
    let k = toeplitz_core::circle::projections::constant(m, 4, EM).unwrap();
    assert_eq!(complete_projection(k.op()).unwrap().iterations(), 0);
}
