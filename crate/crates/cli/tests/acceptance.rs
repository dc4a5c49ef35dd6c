//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines are always printed.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rand::Rng;
use toeplitz_core::algebra::{
    differ_below_depth, fredholm_parametrix, parametrix_bootstrap, reduce_order, toeplitz_compress, BootstrapOptions,
    Calculus, CandidateKind, ToeplitzElement,
};
use toeplitz_core::circle::inverse::candidate;
use toeplitz_core::circle::projections::{full, hardy};
use toeplitz_core::circle::reduction::{order_reduction, toeplitz_order_reduction, PlainReductions};
use toeplitz_core::circle::{CircleOp, ClassicalSymbol, PointwiseSolver, TrigPoly};
use toeplitz_core::lab::index::eigenvalues;
use toeplitz_core::lab::instances::{
    bootstrap_instance, perturbed_hardy, random_loop, random_sg, random_symbol, rng, route_instance,
};
use toeplitz_core::lab::verify::kernel_identity;
use toeplitz_core::lab::{galerkin_matrix, numerical_index, spectral_inverse, winding_oracle, SpectralOptions};
use toeplitz_core::linalg::{idempotent_eigen_radius, norm2, CMat};
use toeplitz_core::scalar::{cq_int, QMat};
use toeplitz_core::sg::{
    deg, sg_parametrix, three_symbols, Basis, BiOrder, OneVar, SgSymbol,
};
use toeplitz_core::CalcError;

type Outcome = Result<(bool, String), Box<dyn std::error::Error>>;

const EXACT: usize = 64;

fn shift_toeplitz(k: i64, depth: usize) -> ToeplitzElement<CircleOp> {
    let p = hardy(1, depth, EXACT).unwrap();
    let f = TrigPoly::scalar(&[(k, cq_int(1, 0))]);
    toeplitz_compress(&CircleOp::multiplication(f, depth, EXACT), &p, &p).unwrap()
}

fn toeplitz_of(f: TrigPoly, depth: usize) -> ToeplitzElement<CircleOp> {
    let p = hardy(f.rows(), depth, EXACT).unwrap();
    toeplitz_compress(&CircleOp::multiplication(f, depth, EXACT), &p, &p).unwrap()
}

/// Columns `lo ≤ |n| ≤ hi` of a Galerkin matrix with radius `modes`.
fn columns(m: &CMat, modes: usize, dim: usize, lo: usize, hi: usize) -> CMat {
    let idx: Vec<usize> = (-(modes as i64)..=modes as i64)
        .enumerate()
        .filter(|(_, n)| (lo..=hi).contains(&(n.unsigned_abs() as usize)))
        .flat_map(|(i, _)| (i * dim)..(i * dim + dim))
        .collect();
    m.select_columns(&idx)
}

type Criterion = (&'static str, fn() -> Outcome);

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut bad = Vec::new();
    let mut count = 0;
    let mut check = |f: TrigPoly, label: String| -> Result<(), Box<dyn std::error::Error>> {
        let w = winding_oracle(&f, 256)?;
        let r = numerical_index(&toeplitz_of(f, 5), 64, 1e-8)?;
        count += 1;
        if !r.stable || r.index != -w {
            bad.push(format!("{label}: index {} ({}), winding {w}", r.index, r.verdict()));
        }
        Ok(())
    };
    for k in -3..=3 {
        check(TrigPoly::scalar(&[(k, cq_int(1, 0))]), format!("e^(i{k}theta)"))?;
    }
    let mut r = rng(1);
    for i in 0..10 {
        let dim = 1 + i % 2;
        check(random_loop(&mut r, dim, 3), format!("random {dim}x{dim} loop #{i}"))?;
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((
        bad.is_empty() && secs < 10.0,
        format!("{count} loops, {} mismatches, {secs:.2} s{}", bad.len(), if bad.is_empty() { String::new() } else { format!(": {}", bad.join("; ")) }),
    ))
}

fn criterion_2() -> Outcome {
    let mut r = rng(2);
    let opts = BootstrapOptions {
        depth: 5,
        zero_tol: 0.0,
    };
    let mut bad = Vec::new();
    for i in 0..10 {
        let inst = bootstrap_instance(&mut r, 5, EXACT)?;
        let t = &inst.element;
        let (c, approx) = candidate(t.inner(), t.p0(), t.p1())?;
        let par = parametrix_bootstrap(t, &c, &c, CandidateKind::FullAlgebra, opts)?;
        let ok = !approx
            && par.initial_residual_levels >= 1
            && par.left_residual.vanishing_levels(0.0) == 5
            && par.right_residual.vanishing_levels(0.0) == 5
            && par.reconciliation_levels == 5;
        if !ok {
            bad.push(format!(
                "#{i} ({}): approx {approx}, levels {}/{}/{}",
                inst.label, par.left_residual_levels, par.right_residual_levels, par.reconciliation_levels
            ));
        }
    }
    Ok((bad.is_empty(), format!("10 instances, J = 5, exact residual levels; failures: {}", bad.len())))
}

fn criterion_3() -> Outcome {
    let mut r = rng(3);
    let opts = BootstrapOptions {
        depth: 5,
        zero_tol: 0.0,
    };
    let solver = PointwiseSolver {
        options: opts,
        ..PointwiseSolver::default()
    };
    let mut worst = 0.0f64;
    let mut symbolic = true;
    for _ in 0..6 {
        let inst = route_instance(&mut r, 5, EXACT)?;
        let t = &inst.element;
        let (c, _) = candidate(t.inner(), t.p0(), t.p1())?;
        let b1 = parametrix_bootstrap(t, &c, &c, CandidateKind::FullAlgebra, opts)?;
        let b2 = fredholm_parametrix(t, &solver, opts)?;
        symbolic &= differ_below_depth(b1.b.inner(), b2.b.inner(), 0.0)?;
        let m = 128;
        let d = galerkin_matrix(b1.b.inner(), m)?.matrix - galerkin_matrix(b2.b.inner(), m)?.matrix;
        let dim = t.p0().dim();
        worst = worst.max(norm2(&columns(&d, m, dim, 0, m / 2)));
    }
    Ok((
        symbolic && worst <= 1e-6,
        format!("6 inner-monomial instances: symbolic agreement below depth {symbolic}, max interior gap {worst:.3e} at M = 128"),
    ))
}

fn criterion_4() -> Outcome {
    let p = hardy(1, 5, EXACT)?;
    let f = TrigPoly::scalar(&[(0, cq_int(2, 0)), (1, cq_int(1, 0))]);
    let a = toeplitz_compress(&CircleOp::multiplication(f, 5, EXACT), &p, &p)?;
    let (c, _) = candidate(a.inner(), a.p0(), a.p1())?;
    let b = parametrix_bootstrap(&a, &c, &c, CandidateKind::FullAlgebra, BootstrapOptions::default())?;
    let opts = SpectralOptions {
        modes: 128,
        ..SpectralOptions::default()
    };
    let inv = spectral_inverse(&a, &b, opts)?;
    let shift = shift_toeplitz(1, 5);
    let (c1, _) = candidate(shift.inner(), shift.p0(), shift.p1())?;
    let b1 = parametrix_bootstrap(&shift, &c1, &c1, CandidateKind::FullAlgebra, BootstrapOptions::default())?;
    let refusal = spectral_inverse(&shift, &b1, opts);
    let refused = matches!(refusal, Err(CalcError::NoTwoSidedInverse { kernel: 0, cokernel: 1 }));
    Ok((
        inv.left_residual <= 1e-6 && inv.right_residual <= 1e-6 && refused,
        format!(
            "residuals {:.3e} / {:.3e} at M = 128; shift refused with cokernel: {refused}",
            inv.left_residual, inv.right_residual
        ),
    ))
}

fn criterion_5() -> Outcome {
    let t = shift_toeplitz(1, 5);
    let k = kernel_identity(&t, 64, 1e-8)?;
    let ka = kernel_identity(&t.adjoint()?, 64, 1e-8)?;
    let ok = (k.witness_kernel, k.section_kernel) == (0, 0) && (ka.witness_kernel, ka.section_kernel) == (1, 1);
    Ok((
        ok,
        format!(
            "T: ker Gal(W) {} vs section {}; T*: ker Gal(W) {} vs section {}",
            k.witness_kernel, k.section_kernel, ka.witness_kernel, ka.section_kernel
        ),
    ))
}

/// Least-squares slope of `log y` against `log x`.
fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let num: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    num / den
}

fn criterion_6() -> Outcome {
    let mut r = rng(6);
    let j = 4;
    let mut bad = Vec::new();
    let mut margin = f64::INFINITY;
    for i in 0..20 {
        let (mu, nu) = (r.gen_range(-1..=1), r.gen_range(-1..=1));
        let (d0, d1, d2) = (r.gen_range(1..=2), r.gen_range(1..=2), r.gen_range(1..=2));
        let a = random_symbol(&mut r, mu, d0, d1, j, 2);
        let b = random_symbol(&mut r, nu, d1, d2, j, 2);
        let ab = a.compose(&b)?;
        let (oa, ob, oab) = (
            CircleOp::from_symbol(a, 0),
            CircleOp::from_symbol(b, 0),
            CircleOp::from_symbol(ab, 0),
        );
        let ms = [32usize, 64, 128];
        let mut disc = Vec::new();
        for &m in &ms {
            let d = galerkin_matrix(&oab, m)?.matrix - galerkin_matrix(&oa, m)?.matrix * galerkin_matrix(&ob, m)?.matrix;
            disc.push(norm2(&columns(&d, m, d2, m / 4, m / 2)));
        }
        let s = slope(&ms.map(|m| m as f64), &disc);
        let bound = (mu + nu - j as i64) as f64 + 0.5;
        margin = margin.min(bound - s);
        if !(s <= bound) {
            bad.push(format!("pair {i}: slope {s:.2} > {bound} (discrepancies {disc:?})"));
        }
    }
    Ok((
        bad.is_empty(),
        format!("20 pairs, J = 4, smallest margin below the bound {margin:.2}{}", if bad.is_empty() { String::new() } else { format!(": {}", bad.join("; ")) }),
    ))
}

fn criterion_7() -> Outcome {
    let mut r = rng(7);
    let j = 5;
    let max_iter = (j as f64).log2().ceil() as usize;
    let (mut worst_iter, mut worst_radius, mut worst_eig, mut computed) = (0, 0.0f64, 0.0f64, 0);
    let mut ok = true;
    for i in 0..6 {
        let dim = 1 + i % 2;
        let c = perturbed_hardy(&mut r, dim, j, EXACT)?;
        worst_iter = worst_iter.max(c.iterations());
        ok &= c.residual_levels.last().is_some_and(|&l| l >= j);
        let g = galerkin_matrix(c.projection.op(), 32)?.matrix;
        // certified enclosure, plus the computed spectrum when QR converges
        match idempotent_eigen_radius(&g) {
            Some(radius) => worst_radius = worst_radius.max(radius),
            None => ok = false,
        }
        if let Some(ev) = eigenvalues(&g) {
            computed += 1;
            for z in ev {
                worst_eig = worst_eig.max(z.norm().min((z - 1.0).norm()));
            }
        }
    }
    Ok((
        ok && worst_iter <= max_iter && worst_radius <= 0.1 && worst_eig <= 0.1,
        format!("6 perturbed Hardy projections: at most {worst_iter} iterations (bound {max_iter}); eigenvalues of Gal(P) at M = 32 within {worst_radius:.3e} of {{0, 1}} (computed spectra for {computed} of 6, within {worst_eig:.3e})"),
    ))
}

fn criterion_8() -> Outcome {
    let depth = 5;
    let (s, s_inv) = order_reduction(1, 1, depth, EXACT);
    let one = CircleOp::identity(1, depth, EXACT);
    let plain = s.compose(&s_inv)?.sub(&one)?.vanishing_levels(0.0) == depth
        && s_inv.compose(&s)?.sub(&one)?.vanishing_levels(0.0) == depth;

    let p = hardy(1, depth, EXACT)?;
    let red = toeplitz_order_reduction(
        1,
        &p,
        BootstrapOptions::default(),
        SpectralOptions {
            modes: 128,
            ..SpectralOptions::default()
        },
    )?;
    let m = 128;
    let gap = norm2(
        &(galerkin_matrix(red.forward.inner(), m)?.matrix * galerkin_matrix(red.inverse.element.inner(), m)?.matrix
            - galerkin_matrix(p.op(), m)?.matrix),
    );

    // conjugation diagram for D + 1 with s = 1
    let f = full(1, depth, EXACT)?;
    let d1 = CircleOp::from_symbol(ClassicalSymbol::derivative(1, depth), EXACT).add(&one.lift(1)?)?;
    let t = toeplitz_compress(&d1, &f, &f)?;
    let reduced = reduce_order(&t, 1, &PlainReductions)?;
    let m = 64;
    let lhs = galerkin_matrix(reduced.element.inner(), m)?.matrix;
    let rhs = galerkin_matrix(&reduced.target_reduction, m)?.matrix
        * galerkin_matrix(t.inner(), m)?.matrix
        * galerkin_matrix(&reduced.source_reduction, m)?.matrix;
    let diagram = norm2(&columns(&(lhs - rhs), m, 1, 0, m / 2));
    Ok((
        plain && gap <= 1e-6 && diagram <= 1e-8,
        format!("plain pair exact {plain}; Toeplitz pair gap {gap:.3e} at M = 128; diagram defect {diagram:.3e} at M = 64"),
    ))
}

fn criterion_9() -> Outcome {
    let j = 5;
    let a = SgSymbol::weight(BiOrder::new(1, 1), 1, j);
    let s = three_symbols(&a);
    let jx = OneVar::scalar(&[(Basis::even(deg(1)), cq_int(1, 0))]);
    let closed_form = s.interior.iter().all(|f| *f == jx)
        && s.exit.iter().all(|f| *f == jx)
        && s.corners.iter().flatten().all(|c| *c == QMat::identity(1));

    let p = toeplitz_core::sg::parametrix::full(1, j)?;
    let t = toeplitz_compress(&a, &p, &p)?;
    let par = sg_parametrix(
        &t,
        None,
        BootstrapOptions {
            depth: j,
            zero_tol: 0.0,
        },
    )?;
    let exact = par.left_residual.vanishing_levels(0.0) == j && par.right_residual.vanishing_levels(0.0) == j;

    let mut r = rng(9);
    let mut mult = true;
    for _ in 0..10 {
        let dim = r.gen_range(1..=2);
        let oa = BiOrder::new(r.gen_range(-1..=2), r.gen_range(-1..=2));
        let ob = BiOrder::new(r.gen_range(-1..=2), r.gen_range(-1..=2));
        let x = random_sg(&mut r, oa, dim, 4);
        let y = random_sg(&mut r, ob, dim, 4);
        let xy = x.compose(&y)?;
        let lhs = three_symbols(&xy);
        mult &= lhs == three_symbols(&x).product(&three_symbols(&y))? && lhs.corners_consistent();
    }
    Ok((
        closed_form && exact && mult,
        format!("closed-form symbols {closed_form}; residuals zero to bi-order (-{j}, -{j}) {exact}; multiplicativity on 10 pairs {mult}"),
    ))
}

fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn criterion_10() -> Outcome {
    let root = workspace_root();
    let golden_dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let mut cases = Vec::new();
    for entry in std::fs::read_dir(&golden_dir)? {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "json") {
            cases.push(path);
        }
    }
    cases.sort();
    let mut bad = Vec::new();
    for golden in &cases {
        let stem = golden.file_stem().unwrap().to_string_lossy().to_string();
        let (problem, command) = stem.rsplit_once('.').ok_or("golden names are <problem>.<command>.json")?;
        let input = root.join("problems").join(format!("{problem}.json"));
        let expected = std::fs::read(golden)?;
        for run in 0..2 {
            let out = std::env::temp_dir().join(format!("acceptance-{stem}-{run}-{}.json", std::process::id()));
            Command::new(env!("CARGO_BIN_EXE_toeplitz-calc"))
                .arg(command)
                .arg(&input)
                .arg("--seed")
                .arg("7")
                .arg("--json")
                .arg(&out)
                .output()?;
            let got = std::fs::read(&out).unwrap_or_default();
            let _ = std::fs::remove_file(&out);
            if got != expected {
                bad.push(format!("{stem} (run {run})"));
            }
        }
    }
    Ok((
        !cases.is_empty() && bad.is_empty(),
        format!("{} golden reports, two runs each; mismatches: {}", cases.len(), if bad.is_empty() { "none".into() } else { bad.join(", ") }),
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("index equals minus winding", criterion_1),
        ("bootstrap from pointwise inverses", criterion_2),
        ("route equivalence", criterion_3),
        ("spectral invariance", criterion_4),
        ("kernel identity", criterion_5),
        ("composition faithfulness", criterion_6),
        ("projection completion", criterion_7),
        ("order reductions", criterion_8),
        ("SG calculus", criterion_9),
        ("CLI determinism", criterion_10),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|s| s.parse().ok());
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if only.is_some_and(|k| k != i + 1) {
            continue;
        }
        let start = Instant::now();
        let (pass, detail) = match run() {
            Ok(x) => x,
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {:<36} {}  {} [{:.1} s]",
            i + 1,
            name,
            if pass { "PASS" } else { "FAIL" },
            detail,
            start.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
