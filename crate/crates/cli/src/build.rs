//! Turns a validated problem into core objects.

use num_rational::Ratio;
use num_traits::ToPrimitive;
use toeplitz_core::algebra::{toeplitz_compress, Calculus, ProjectionHandle, ToeplitzElement};
use toeplitz_core::circle::projections::{self, complete_from_principal};
use toeplitz_core::circle::{CircleOp, ClassicalSymbol, HomComponent, TrigPoly, DEFAULT_EXACT_MODES};
use toeplitz_core::scalar::{q_parse, Cq, Q, QMat};
use toeplitz_core::sg::{self, Basis, BiOrder, Deg, OneVar, SgSymbol};
use toeplitz_core::CalcError;

use crate::error::CliError;
use crate::problem::{
    schema, Component, Entry, FourierEntry, Matrix, ProblemSpec, ProjectionDef, Scalar, SgSymbolDef, SymbolDef,
};

pub enum Built {
    Circle(ToeplitzElement<CircleOp>),
    Sg(ToeplitzElement<SgSymbol>),
}

/// Builds the problem once at its own depth, reporting the first error.
pub fn check(spec: &ProblemSpec) -> Result<(), CliError> {
    build(spec, spec.depth).map(|_| ())
}

pub fn build(spec: &ProblemSpec, depth: usize) -> Result<Built, CliError> {
    let (rows, cols) = (spec.dim.target(), spec.dim.source());
    match &spec.symbol {
        SymbolDef::Circle(def) => {
            let mult = match &def.multiplication {
                Some(entries) => Some(CircleOp::multiplication(
                    trig(entries, rows, cols, "symbol.multiplication")?,
                    depth,
                    DEFAULT_EXACT_MODES,
                )),
                None => None,
            };
            let a = match (def.order, mult) {
                (None, Some(m)) if def.components.is_empty() => m,
                (None, _) => return Err(schema("symbol.order", "missing order (or give only \"multiplication\")")),
                (Some(order), mult) => {
                    if def.components.len() > spec.depth {
                        return Err(schema(
                            "symbol.components",
                            format!("{} components exceed depth {}", def.components.len(), spec.depth),
                        ));
                    }
                    let sym = classical(order, &def.components, 0, rows, cols, depth, "symbol.components")?;
                    let op = CircleOp::from_symbol(sym, DEFAULT_EXACT_MODES);
                    match mult {
                        // M_f counts as an element of order ≤ 0 lifted to `order`
                        Some(m) if order >= 0 => op.add(&m.lift(order)?)?,
                        Some(_) => {
                            return Err(schema("symbol.multiplication", "multiplication needs a symbol order ≥ 0"))
                        }
                        None => op,
                    }
                }
            };
            let p0 = circle_projection(&spec.projections.source, cols, depth, "projections.source")?;
            let p1 = circle_projection(&spec.projections.target, rows, depth, "projections.target")?;
            Ok(Built::Circle(toeplitz_compress(&a, &p0, &p1)?))
        }
        SymbolDef::Sg(def) => {
            let a = sg_symbol(def, rows, cols, depth)?;
            let p0 = sg_projection(&spec.projections.source, cols, depth, "projections.source")?;
            let p1 = sg_projection(&spec.projections.target, rows, depth, "projections.target")?;
            Ok(Built::Sg(toeplitz_compress(&a, &p0, &p1)?))
        }
    }
}

fn scalar(s: &Scalar, path: &str) -> Result<Q, CliError> {
    let text = match s {
        // `Display` of an f64 is its shortest round-trip decimal
        Scalar::Number(x) if x.is_finite() => x.to_string(),
        Scalar::Number(_) => return Err(schema(path, "number must be finite")),
        Scalar::Text(t) => t.clone(),
    };
    q_parse(&text).ok_or_else(|| schema(path, format!("cannot read {text:?} as a rational number")))
}

fn integer(s: &Scalar, path: &str) -> Result<i64, CliError> {
    let q = scalar(s, path)?;
    if !q.is_integer() {
        return Err(schema(path, "expected an integer"));
    }
    q.to_integer().to_i64().ok_or_else(|| schema(path, "integer out of range"))
}

fn index(s: &Scalar, bound: usize, path: &str) -> Result<usize, CliError> {
    let i = integer(s, path)?;
    usize::try_from(i)
        .ok()
        .filter(|&i| i < bound)
        .ok_or_else(|| schema(path, format!("index {i} outside 0..{bound}")))
}

fn entry(e: &Entry, path: &str) -> Result<Cq, CliError> {
    match e {
        Entry::Real(s) => Ok(Cq::new(scalar(s, path)?, Q::default())),
        Entry::Complex([re, im]) => Ok(Cq::new(scalar(re, &format!("{path}[0]"))?, scalar(im, &format!("{path}[1]"))?)),
    }
}

fn matrix(m: &Matrix, rows: usize, cols: usize, path: &str) -> Result<QMat, CliError> {
    if m.len() != rows || m.iter().any(|r| r.len() != cols) {
        return Err(schema(path, format!("expected a {rows}x{cols} matrix")));
    }
    let mut out = QMat::zeros(rows, cols);
    for (i, row) in m.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            out.set(i, j, entry(e, &format!("{path}[{i}][{j}]"))?);
        }
    }
    Ok(out)
}

fn trig(entries: &[FourierEntry], rows: usize, cols: usize, path: &str) -> Result<TrigPoly, CliError> {
    let mut f = TrigPoly::zero(rows, cols);
    for (k, e) in entries.iter().enumerate() {
        let p = format!("{path}[{k}]");
        let (r, c) = match e.len() {
            3 if rows == 1 && cols == 1 => (0, 0),
            3 => return Err(schema(p, "matrix-valued data needs [mode, re, im, row, col]")),
            5 => (index(&e[3], rows, &format!("{p}[3]"))?, index(&e[4], cols, &format!("{p}[4]"))?),
            _ => return Err(schema(p, "expected [mode, re, im] or [mode, re, im, row, col]")),
        };
        let mode = integer(&e[0], &format!("{p}[0]"))?;
        let z = Cq::new(scalar(&e[1], &format!("{p}[1]"))?, scalar(&e[2], &format!("{p}[2]"))?);
        let mut m = QMat::zeros(rows, cols);
        m.set(r, c, z);
        f.add_term(mode, &m);
    }
    Ok(f)
}

/// Classical symbol whose listed components start at index `first`.
fn classical(
    order: i64,
    comps: &[Component],
    first: usize,
    rows: usize,
    cols: usize,
    depth: usize,
    path: &str,
) -> Result<ClassicalSymbol, CliError> {
    let mut sym = ClassicalSymbol::zero(order, rows, cols, depth);
    for (k, c) in comps.iter().enumerate() {
        let j = first + k;
        let expected = order - j as i64;
        if c.degree != expected {
            return Err(schema(
                format!("{path}[{k}].degree"),
                format!("expected degree {expected}, found {}; list zero components to fill gaps", c.degree),
            ));
        }
        if j < depth {
            let plus = trig(&c.plus, rows, cols, &format!("{path}[{k}].plus"))?;
            let minus = trig(&c.minus, rows, cols, &format!("{path}[{k}].minus"))?;
            *sym.component_mut(j) = HomComponent::new(plus, minus);
        }
    }
    Ok(sym)
}

fn at(path: &str, e: CalcError) -> CliError {
    schema(path, e.to_string())
}

fn circle_projection(
    def: &ProjectionDef,
    dim: usize,
    depth: usize,
    path: &str,
) -> Result<ProjectionHandle<CircleOp>, CliError> {
    let em = DEFAULT_EXACT_MODES;
    match def {
        ProjectionDef::Hardy => Ok(projections::hardy(dim, depth, em)?),
        ProjectionDef::Full => Ok(projections::full(dim, depth, em)?),
        ProjectionDef::TwistedLine => {
            if dim != 2 {
                return Err(schema(path, format!("twisted-line acts on dimension 2, not {dim}")));
            }
            Ok(projections::twisted_line(depth, em)?)
        }
        ProjectionDef::Constant(m) => {
            let m = matrix(m, dim, dim, &format!("{path}.constant"))?;
            projections::constant(m, depth, em).map_err(|e| at(path, e))
        }
        ProjectionDef::Complete(c) => {
            let p = format!("{path}.complete");
            let plus = trig(&c.plus, dim, dim, &format!("{p}.plus"))?;
            let minus = trig(&c.minus, dim, dim, &format!("{p}.minus"))?;
            let pert = classical(0, &c.perturbation, 1, dim, dim, depth, &format!("{p}.perturbation"))?;
            let done = complete_from_principal(HomComponent::new(plus, minus), Some(&pert), depth, em)
                .map_err(|e| at(&p, e))?;
            Ok(done.projection)
        }
    }
}

fn sg_projection(def: &ProjectionDef, dim: usize, depth: usize, path: &str) -> Result<ProjectionHandle<SgSymbol>, CliError> {
    match def {
        ProjectionDef::Full => Ok(sg::parametrix::full(dim, depth)?),
        ProjectionDef::Constant(m) => {
            let m = matrix(m, dim, dim, &format!("{path}.constant"))?;
            sg::parametrix::constant(m, depth).map_err(|e| at(path, e))
        }
        _ => Err(schema(path, "projection not available for algebra sg")),
    }
}

fn degree(s: &Scalar, path: &str) -> Result<Deg, CliError> {
    let q = scalar(s, path)?;
    match (q.numer().to_i64(), q.denom().to_i64()) {
        (Some(n), Some(d)) => Ok(Ratio::new(n, d)),
        _ => Err(schema(path, "degree out of range")),
    }
}

fn basis_sum(entries: &[Vec<Scalar>], path: &str) -> Result<OneVar, CliError> {
    let mut terms = Vec::new();
    for (k, e) in entries.iter().enumerate() {
        let p = format!("{path}[{k}]");
        if e.len() != 4 {
            return Err(schema(p, "expected [degree, parity, re, im]"));
        }
        let odd = match integer(&e[1], &format!("{p}[1]"))? {
            0 => false,
            1 => true,
            _ => return Err(schema(format!("{p}[1]"), "parity must be 0 or 1")),
        };
        let b = Basis {
            degree: degree(&e[0], &format!("{p}[0]"))?,
            odd,
        };
        let c = Cq::new(scalar(&e[2], &format!("{p}[2]"))?, scalar(&e[3], &format!("{p}[3]"))?);
        terms.push((b, c));
    }
    Ok(OneVar::scalar(&terms))
}

fn sg_symbol(def: &SgSymbolDef, rows: usize, cols: usize, depth: usize) -> Result<SgSymbol, CliError> {
    let order = BiOrder::new(def.order.xi, def.order.x);
    let mut a = SgSymbol::zero(order, rows, cols, depth);
    for (i, t) in def.terms.iter().enumerate() {
        let p = format!("symbol.terms[{i}]");
        let m = matrix(&t.matrix, rows, cols, &format!("{p}.matrix"))?;
        let x = basis_sum(&t.x, &format!("{p}.x"))?;
        let xi = basis_sum(&t.xi, &format!("{p}.xi"))?;
        let term = SgSymbol::separable(order, depth, &x, &xi, &m).map_err(|e| at(&p, e))?;
        a = a.add(&term)?;
    }
    Ok(a)
}
