//! Problem documents: JSON schema, parsing with field paths, validation.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algebra {
    Circle,
    Sg,
}

impl Algebra {
    pub fn name(self) -> &'static str {
        match self {
            Algebra::Circle => "circle",
            Algebra::Sg => "sg",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Ellipticity,
    Parametrix,
    Index,
    Invert,
    Reduce,
    Verify,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Ellipticity => "ellipticity",
            Task::Parametrix => "parametrix",
            Task::Index => "index",
            Task::Invert => "invert",
            Task::Reduce => "reduce",
            Task::Verify => "verify",
        }
    }

    /// Finite sections exist only for the circle.
    pub fn available_for(self, algebra: Algebra) -> bool {
        algebra == Algebra::Circle || matches!(self, Task::Ellipticity | Task::Parametrix | Task::Reduce)
    }
}

/// A JSON number or a string holding `"p/q"` or a decimal literal. Both
/// are read exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Number(f64),
    Text(String),
}

/// A real scalar or a `[re, im]` pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(Scalar),
    Complex([Scalar; 2]),
}

pub type Matrix = Vec<Vec<Entry>>;

/// `[mode, re, im]` for 1×1 data, `[mode, re, im, row, col]` otherwise.
pub type FourierEntry = Vec<Scalar>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Component {
    pub degree: i64,
    #[serde(default)]
    pub plus: Vec<FourierEntry>,
    #[serde(default)]
    pub minus: Vec<FourierEntry>,
}

/// Circle operator `Op(a) + M_f`: a classical symbol (mode 0 is cut off),
/// a multiplication operator, or both.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircleSymbolDef {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<i64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub components: Vec<Component>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiplication: Option<Vec<FourierEntry>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BiOrderDef {
    pub xi: i64,
    pub x: i64,
}

/// `[degree, parity, re, im]`: coefficient of `b_{degree,parity}`.
pub type BasisEntry = Vec<Scalar>;

/// `(Σ p_i b_i(x)) (Σ q_j b_j(ξ)) · matrix`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SgTerm {
    pub matrix: Matrix,
    pub x: Vec<BasisEntry>,
    pub xi: Vec<BasisEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SgSymbolDef {
    pub order: BiOrderDef,
    pub terms: Vec<SgTerm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SymbolDef {
    Circle(CircleSymbolDef),
    Sg(SgSymbolDef),
}

/// Principal projection data refined by Newton–Schulz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompleteDef {
    #[serde(default)]
    pub plus: Vec<FourierEntry>,
    #[serde(default)]
    pub minus: Vec<FourierEntry>,
    /// Components of degree −1, −2, … of an order-zero perturbation.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub perturbation: Vec<Component>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProjectionDef {
    Hardy,
    Full,
    TwistedLine,
    Constant(Matrix),
    Complete(CompleteDef),
}

impl ProjectionDef {
    pub fn name(&self) -> &'static str {
        match self {
            ProjectionDef::Hardy => "hardy",
            ProjectionDef::Full => "full",
            ProjectionDef::TwistedLine => "twisted-line",
            ProjectionDef::Constant(_) => "constant",
            ProjectionDef::Complete(_) => "complete",
        }
    }

    fn available_for(&self, algebra: Algebra) -> bool {
        algebra == Algebra::Circle || matches!(self, ProjectionDef::Full | ProjectionDef::Constant(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Projections {
    pub source: ProjectionDef,
    pub target: ProjectionDef,
}

/// `n` for a square problem, `[target, source]` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Dims {
    Square(usize),
    Rect([usize; 2]),
}

impl Dims {
    pub fn target(self) -> usize {
        match self {
            Dims::Square(n) => n,
            Dims::Rect([t, _]) => t,
        }
    }

    pub fn source(self) -> usize {
        match self {
            Dims::Square(n) => n,
            Dims::Rect([_, s]) => s,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Parameters {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cond: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Target order of `reduce` (`[xi, x]` for sg; circle uses the first
    /// entry).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reduce_to: Option<Vec<i64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProblemSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub algebra: Algebra,
    pub dim: Dims,
    pub depth: usize,
    pub symbol: SymbolDef,
    pub projections: Projections,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub tasks: Vec<Task>,
    #[serde(skip_serializing_if = "is_default")]
    pub parameters: Parameters,
}

fn is_default(p: &Parameters) -> bool {
    *p == Parameters::default()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    #[serde(default)]
    name: Option<String>,
    algebra: Algebra,
    dim: Dims,
    depth: usize,
    symbol: serde_json::Value,
    #[serde(default)]
    projection: Option<ProjectionDef>,
    #[serde(default)]
    projections: Option<Projections>,
    #[serde(default)]
    tasks: Vec<Task>,
    #[serde(default)]
    parameters: Parameters,
}

pub(crate) fn schema(path: impl Into<String>, message: impl Into<String>) -> CliError {
    CliError::Schema {
        path: path.into(),
        message: message.into(),
    }
}

fn sub_document<T: DeserializeOwned>(value: serde_json::Value, prefix: &str) -> Result<T, CliError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let inner = e.path().to_string();
        let path = if inner == "." { prefix.to_string() } else { format!("{prefix}.{inner}") };
        schema(path, e.into_inner().to_string())
    })
}

/// Parses and validates a problem document.
pub fn parse_problem(text: &str) -> Result<ProblemSpec, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawProblem = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        schema(if path == "." { "document".into() } else { path }, e.into_inner().to_string())
    })?;
    let algebra = raw.algebra;

    let symbol = match algebra {
        Algebra::Circle => SymbolDef::Circle(sub_document(raw.symbol, "symbol")?),
        Algebra::Sg => SymbolDef::Sg(sub_document(raw.symbol, "symbol")?),
    };

    let projections = match (raw.projection, raw.projections) {
        (Some(p), None) => {
            if raw.dim.source() != raw.dim.target() {
                return Err(schema(
                    "projection",
                    "a single projection needs equal source and target dimensions; use \"projections\"",
                ));
            }
            Projections {
                source: p.clone(),
                target: p,
            }
        }
        (None, Some(p)) => p,
        (Some(_), Some(_)) => return Err(schema("projection", "give either \"projection\" or \"projections\"")),
        (None, None) => return Err(schema("projections", "missing projection definition")),
    };
    for (side, p) in [("source", &projections.source), ("target", &projections.target)] {
        if !p.available_for(algebra) {
            return Err(schema(
                format!("projections.{side}"),
                format!("projection not available for algebra {}", algebra.name()),
            ));
        }
    }

    for (i, t) in raw.tasks.iter().enumerate() {
        if !t.available_for(algebra) {
            return Err(schema(
                format!("tasks[{i}]"),
                format!("task {} not available for algebra {}", t.name(), algebra.name()),
            ));
        }
    }
    if raw.depth == 0 {
        return Err(schema("depth", "depth must be at least 1"));
    }
    if raw.dim.source() == 0 || raw.dim.target() == 0 {
        return Err(schema("dim", "dimensions must be positive"));
    }

    let spec = ProblemSpec {
        name: raw.name,
        algebra,
        dim: raw.dim,
        depth: raw.depth,
        symbol,
        projections,
        tasks: raw.tasks,
        parameters: raw.parameters,
    };
    // degree bookkeeping and entry syntax are checked by building once
    crate::build::check(&spec)?;
    Ok(spec)
}
