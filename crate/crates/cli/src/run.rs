//! Command dispatch.

use serde::Serialize;
use serde_json::{json, Value};
use toeplitz_core::algebra::{
    parametrix_bootstrap, reduce_order, BootstrapOptions, Calculus, CandidateKind, Parametrix, ParametrixRoute,
    ToeplitzElement,
};
use toeplitz_core::circle::inverse::candidate;
use toeplitz_core::circle::reduction::PlainReductions;
use toeplitz_core::circle::{check_ellipticity, CircleOp, DEFAULT_EXACT_MODES};
use toeplitz_core::lab::{galerkin_matrix, numerical_index, spectral_inverse, verify_suite, SpectralOptions, VerifyOptions};
use toeplitz_core::linalg::norm2;
use toeplitz_core::sg::{sg_check_ellipticity, sg_parametrix, BiOrder, SgReductions, SgSymbol};
use toeplitz_core::CalcError;

use crate::build::{build, Built};
use crate::error::CliError;
use crate::problem::{schema, ProblemSpec, Task};
use crate::report::{certificate_summary, CertificateJson, Report, Settings, Status};

/// Command-line overrides of the problem's parameters.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Flags {
    pub modes: Option<usize>,
    pub depth: Option<usize>,
    pub tol: Option<f64>,
    pub cond: Option<f64>,
    pub grid: Option<usize>,
    pub seed: Option<u64>,
}

pub fn settings(spec: &ProblemSpec, flags: &Flags) -> Result<Settings, CliError> {
    let p = &spec.parameters;
    let s = Settings {
        modes: flags.modes.or(p.modes).unwrap_or(64),
        depth: flags.depth.unwrap_or(spec.depth),
        tol: flags.tol.or(p.tol).unwrap_or(1e-8),
        cond: flags.cond.or(p.cond).unwrap_or(1e8),
        grid: flags.grid.or(p.grid).unwrap_or(256),
        seed: flags.seed.or(p.seed).unwrap_or(0),
        exact_modes: DEFAULT_EXACT_MODES,
        reduce_to: p.reduce_to.clone().unwrap_or_default(),
    };
    if !(s.tol > 0.0 && s.tol < 1.0) {
        return Err(schema("tol", format!("threshold {} must lie in (0, 1)", s.tol)));
    }
    if !(s.cond > 1.0) {
        return Err(schema("cond", format!("condition bound {} must exceed 1", s.cond)));
    }
    if s.grid < 3 {
        return Err(schema("grid", "grid needs at least 3 points"));
    }
    if s.modes == 0 {
        return Err(schema("modes", "resolution must be positive"));
    }
    if s.depth == 0 {
        return Err(schema("depth", "depth must be at least 1"));
    }
    Ok(s)
}

/// Outcome of a command before it is wrapped into a report.
struct Outcome {
    status: Status,
    summary: String,
    result: Value,
}

fn outcome(status: Status, summary: impl Into<String>, result: impl Serialize) -> Outcome {
    Outcome {
        status,
        summary: summary.into(),
        result: serde_json::to_value(result).expect("results serialize"),
    }
}

pub fn run(command: Task, spec: &ProblemSpec, name: String, flags: &Flags) -> Report {
    let mut report = Report::new(command, name);
    report.algebra = Some(spec.algebra);
    let s = match settings(spec, flags) {
        Ok(s) => s,
        Err(e) => return failed(report, e),
    };
    report.parameters = Some(s.clone());
    if !command.available_for(spec.algebra) {
        let e = schema(
            "command",
            format!("task {} not available for algebra {}", command.name(), spec.algebra.name()),
        );
        return failed(report, e);
    }
    let res = build(spec, s.depth).and_then(|b| match b {
        Built::Circle(t) => circle(command, &t, &s),
        Built::Sg(t) => sg(command, &t, &s),
    });
    match res {
        Ok(o) => {
            report.result = o.result;
            report.finish(o.status, o.summary)
        }
        Err(e) => failed(report, e),
    }
}

pub fn failed(mut report: Report, e: CliError) -> Report {
    let status = Status::from_exit_code(e.exit_code());
    report.error = Some(e.to_string());
    report.finish(status, format!("{}: {e}", status_word(status)))
}

fn status_word(s: Status) -> &'static str {
    match s {
        Status::Pass => "pass",
        Status::Negative => "negative",
        Status::Invalid => "invalid input",
        Status::Unresolved => "unresolved",
    }
}

#[derive(Serialize)]
struct ParametrixJson {
    route: &'static str,
    candidate_approximate: bool,
    initial_residual_levels: usize,
    left_residual_levels: usize,
    right_residual_levels: usize,
    reconciliation_levels: usize,
    residual_order: String,
    discarded: f64,
    certified: bool,
}

fn parametrix_json<C: Calculus>(p: &Parametrix<C>, approximate: bool, residual_order: String) -> ParametrixJson {
    ParametrixJson {
        route: match p.route {
            ParametrixRoute::Bootstrap => "bootstrap",
            ParametrixRoute::FredholmWitness => "fredholm-witness",
        },
        candidate_approximate: approximate,
        initial_residual_levels: p.initial_residual_levels,
        left_residual_levels: p.left_residual_levels,
        right_residual_levels: p.right_residual_levels,
        reconciliation_levels: p.reconciliation_levels,
        residual_order,
        discarded: p.discarded,
        certified: p.is_certified(),
    }
}

fn bootstrap_options(s: &Settings) -> BootstrapOptions {
    BootstrapOptions {
        depth: s.depth,
        zero_tol: 1e-12,
    }
}

/// Grid fine enough to resolve the principal data of every factor.
fn circle_grid(t: &ToeplitzElement<CircleOp>, grid: usize) -> usize {
    let bw = |c: &CircleOp| c.symbol().principal().bandwidth();
    let k = bw(t.inner()).max(bw(t.p0().op())).max(bw(t.p1().op()));
    grid.max(4 * (k + 1))
}

fn circle_parametrix(t: &ToeplitzElement<CircleOp>, s: &Settings) -> Result<(Parametrix<CircleOp>, bool), CliError> {
    let (c, approximate) = candidate(t.inner(), t.p0(), t.p1())?;
    let p = parametrix_bootstrap(t, &c, &c, CandidateKind::FullAlgebra, bootstrap_options(s))?;
    Ok((p, approximate))
}

/// Order-zero element for the finite-section commands, reducing if needed.
fn order_zero(t: &ToeplitzElement<CircleOp>) -> Result<(ToeplitzElement<CircleOp>, Option<i64>), CliError> {
    if t.order() == 0 {
        return Ok((t.clone(), None));
    }
    Ok((reduce_order(t, 0, &PlainReductions)?.element, Some(t.order())))
}

fn circle(command: Task, t: &ToeplitzElement<CircleOp>, s: &Settings) -> Result<Outcome, CliError> {
    match command {
        Task::Ellipticity => {
            let c = check_ellipticity(t, circle_grid(t, s.grid), s.cond)?;
            let status = if c.is_elliptic() { Status::Pass } else { Status::Negative };
            Ok(outcome(status, certificate_summary(&c), json!({ "certificate": CertificateJson::from(&c) })))
        }
        Task::Parametrix => {
            let c = check_ellipticity(t, circle_grid(t, s.grid), s.cond)?;
            if !c.is_elliptic() {
                let summary = certificate_summary(&c);
                return Ok(outcome(Status::Negative, summary, json!({ "certificate": CertificateJson::from(&c) })));
            }
            let (p, approx) = circle_parametrix(t, s)?;
            let levels = p.left_residual_levels.min(p.right_residual_levels);
            let pj = parametrix_json(&p, approx, format!("{}", -(levels as i64)));
            let (status, summary) = if pj.certified {
                (Status::Pass, format!("parametrix certified, residual order {}", pj.residual_order))
            } else {
                (Status::Unresolved, format!("parametrix residual only reaches order {}", pj.residual_order))
            };
            Ok(outcome(
                status,
                summary,
                json!({ "certificate": CertificateJson::from(&c), "parametrix": pj }),
            ))
        }
        Task::Index => {
            let (t0, from) = order_zero(t)?;
            let r = numerical_index(&t0, s.modes, s.tol)?;
            let status = if r.stable { Status::Pass } else { Status::Unresolved };
            let summary = format!(
                "index {} (kernel {}, cokernel {}), {} at M = {} and {}",
                r.index,
                r.kernel,
                r.cokernel,
                r.verdict(),
                r.modes,
                2 * r.modes
            );
            Ok(outcome(
                status,
                summary,
                json!({
                    "reduced_from_order": from,
                    "kernel": r.kernel,
                    "cokernel": r.cokernel,
                    "index": r.index,
                    "smallest_retained": r.smallest_retained,
                    "largest_discarded": r.largest_discarded,
                    "threshold": r.threshold,
                    "stable": r.stable,
                    "verdict": r.verdict(),
                    "doubled": {
                        "modes": r.doubled.modes,
                        "kernel": r.doubled.kernel,
                        "cokernel": r.doubled.cokernel,
                        "smallest_retained": r.doubled.smallest_retained,
                    },
                }),
            ))
        }
        Task::Invert => {
            if t.order() != 0 {
                return Err(schema("symbol.order", "invert needs an order-zero element"));
            }
            let c = check_ellipticity(t, circle_grid(t, s.grid), s.cond)?;
            if !c.is_elliptic() {
                let summary = format!("no inverse: {}", certificate_summary(&c));
                return Ok(outcome(Status::Negative, summary, json!({ "certificate": CertificateJson::from(&c) })));
            }
            let (p, _) = circle_parametrix(t, s)?;
            let opts = SpectralOptions {
                modes: s.modes,
                tau: s.tol,
                cond: s.cond,
            };
            match spectral_inverse(t, &p, opts) {
                Ok(inv) => Ok(outcome(
                    if inv.left_interior.max(inv.right_interior) <= s.tol {
                        Status::Pass
                    } else {
                        Status::Unresolved
                    },
                    format!(
                        "inverse found, interior residuals {:e} / {:e} at M = {}",
                        inv.left_interior, inv.right_interior, inv.modes
                    ),
                    json!({
                        "left_residual": inv.left_residual,
                        "right_residual": inv.right_residual,
                        "left_interior_residual": inv.left_interior,
                        "right_interior_residual": inv.right_interior,
                        "interior_columns": inv.modes / 2,
                        "condition": inv.condition,
                        "modes": inv.modes,
                    }),
                )),
                Err(e @ CalcError::NoTwoSidedInverse { kernel, cokernel }) => Ok(outcome(
                    Status::Negative,
                    e.to_string(),
                    json!({ "kernel": kernel, "cokernel": cokernel }),
                )),
                Err(e) => Err(e.into()),
            }
        }
        Task::Reduce => {
            let target = s.reduce_to.first().copied().unwrap_or(0);
            let r = reduce_order(t, target, &PlainReductions)?;
            let e = &r.element;
            let idem = |p: &CircleOp| -> Result<usize, CalcError> { Ok(p.compose(p)?.sub(p)?.vanishing_levels(0.0)) };
            let (l0, l1) = (idem(e.p0().op())?, idem(e.p1().op())?);
            let m = s.modes;
            let lhs = galerkin_matrix(e.inner(), m)?.matrix;
            let rhs = galerkin_matrix(&r.target_reduction, m)?.matrix
                * galerkin_matrix(t.inner(), m)?.matrix
                * galerkin_matrix(&r.source_reduction, m)?.matrix;
            let dim = e.inner().source_dim();
            let lo = (m - m / 2) * dim;
            let interior = (lhs - rhs).columns(lo, (2 * (m / 2) + 1) * dim).into_owned();
            let defect = norm2(&interior);
            let ok = l0 >= s.depth && l1 >= s.depth && defect <= s.tol;
            let status = if ok { Status::Pass } else { Status::Unresolved };
            Ok(outcome(
                status,
                format!("reduced order {} -> {}, diagram defect {defect:e} at M = {m}", t.order(), e.order()),
                json!({
                    "original_order": t.order(),
                    "reduced_order": e.order(),
                    "target_reduction_order": r.target_reduction.order(),
                    "source_reduction_order": r.source_reduction.order(),
                    "projection_levels": [l0, l1],
                    "diagram_defect": defect,
                    "diagram_columns": m / 2,
                }),
            ))
        }
        Task::Verify => {
            let (t0, from) = order_zero(t)?;
            let opts = VerifyOptions {
                modes: s.modes,
                tau: s.tol,
                grid: s.grid,
                cond: s.cond,
                depth: s.depth,
                seed: s.seed,
            };
            let v = verify_suite(&t0, opts)?;
            let passed = v.checks.iter().filter(|c| c.passed).count();
            let status = if v.passed() { Status::Pass } else { Status::Negative };
            let checks: Vec<Value> = v
                .checks
                .iter()
                .map(|c| json!({ "name": c.name, "passed": c.passed, "detail": c.detail }))
                .collect();
            Ok(outcome(
                status,
                format!("{passed} of {} checks passed", v.checks.len()),
                json!({ "reduced_from_order": from, "checks": checks }),
            ))
        }
    }
}

fn sg(command: Task, t: &ToeplitzElement<SgSymbol>, s: &Settings) -> Result<Outcome, CliError> {
    match command {
        Task::Ellipticity => {
            let c = sg_check_ellipticity(t, s.grid, s.grid, s.cond)?;
            let status = if c.is_elliptic() { Status::Pass } else { Status::Negative };
            Ok(outcome(status, certificate_summary(&c), json!({ "certificate": CertificateJson::from(&c) })))
        }
        Task::Parametrix => {
            let c = sg_check_ellipticity(t, s.grid, s.grid, s.cond)?;
            if !c.is_elliptic() {
                let summary = certificate_summary(&c);
                return Ok(outcome(Status::Negative, summary, json!({ "certificate": CertificateJson::from(&c) })));
            }
            let p = sg_parametrix(t, None, bootstrap_options(s))?;
            let l = p.left_residual_levels.min(p.right_residual_levels) as i64;
            let residual = BiOrder::new(-l, -l);
            let pj = parametrix_json(&p, false, residual.to_string());
            let (status, summary) = if pj.certified {
                (Status::Pass, format!("parametrix certified, residual bi-order {residual}"))
            } else {
                (Status::Unresolved, format!("parametrix residual only reaches bi-order {residual}"))
            };
            Ok(outcome(
                status,
                summary,
                json!({ "certificate": CertificateJson::from(&c), "parametrix": pj }),
            ))
        }
        Task::Reduce => {
            let target = match s.reduce_to.as_slice() {
                [] => BiOrder::new(0, 0),
                [xi, x] => BiOrder::new(*xi, *x),
                _ => return Err(schema("parameters.reduce_to", "sg targets are [xi, x]")),
            };
            let r = reduce_order(t, target, &SgReductions)?;
            let e = &r.element;
            let idem = |p: &SgSymbol| -> Result<usize, CalcError> { Ok(p.compose(p)?.sub(p)?.vanishing_levels(0.0)) };
            let (l0, l1) = (idem(e.p0().op())?, idem(e.p1().op())?);
            let ok = l0 >= s.depth && l1 >= s.depth;
            let status = if ok { Status::Pass } else { Status::Unresolved };
            Ok(outcome(
                status,
                format!("reduced bi-order {} -> {}", t.order(), e.order()),
                json!({
                    "original_order": t.order().to_string(),
                    "reduced_order": e.order().to_string(),
                    "target_reduction_order": r.target_reduction.order().to_string(),
                    "source_reduction_order": r.source_reduction.order().to_string(),
                    "projection_levels": [l0, l1],
                }),
            ))
        }
        Task::Index | Task::Invert | Task::Verify => unreachable!("filtered by Task::available_for"),
    }
}

