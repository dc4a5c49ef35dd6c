//! Machine-readable reports and their plain-text rendering.

use serde::Serialize;
use serde_json::Value;
use toeplitz_core::certificate::{Certificate, Verdict};
use toeplitz_core::error::Witness;

use crate::error::{EXIT_INVALID, EXIT_NEGATIVE, EXIT_PASS, EXIT_UNRESOLVED};
use crate::problem::{Algebra, Task};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Negative,
    Invalid,
    Unresolved,
}

impl Status {
    pub fn from_exit_code(code: i32) -> Self {
        match code {
            EXIT_PASS => Status::Pass,
            EXIT_NEGATIVE => Status::Negative,
            EXIT_UNRESOLVED => Status::Unresolved,
            _ => Status::Invalid,
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => EXIT_PASS,
            Status::Negative => EXIT_NEGATIVE,
            Status::Invalid => EXIT_INVALID,
            Status::Unresolved => EXIT_UNRESOLVED,
        }
    }
}

/// Every numeric knob that influenced the run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Settings {
    pub modes: usize,
    pub depth: usize,
    pub tol: f64,
    pub cond: f64,
    pub grid: usize,
    pub seed: u64,
    pub exact_modes: usize,
    pub reduce_to: Vec<i64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: Task,
    pub problem: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub algebra: Option<Algebra>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parameters: Option<Settings>,
    pub status: Status,
    pub exit_code: i32,
    pub summary: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub result: Value,
}

impl Report {
    pub fn new(command: Task, problem: String) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            problem,
            algebra: None,
            parameters: None,
            status: Status::Invalid,
            exit_code: EXIT_INVALID,
            summary: String::new(),
            error: None,
            result: Value::Null,
        }
    }

    pub fn finish(mut self, status: Status, summary: impl Into<String>) -> Self {
        self.status = status;
        self.exit_code = status.exit_code();
        self.summary = summary.into();
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    /// Summary line followed by the flattened result as `key  value` rows.
    pub fn table(&self) -> String {
        let mut rows = vec![
            ("command".to_string(), self.command.name().to_string()),
            ("problem".to_string(), self.problem.clone()),
            ("status".to_string(), format!("{:?}", self.status).to_lowercase()),
        ];
        if let Some(e) = &self.error {
            rows.push(("error".into(), e.clone()));
        }
        flatten("", &self.result, &mut rows);
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        let mut out = format!("{}\n", self.summary);
        for (k, v) in rows {
            out.push_str(&format!("  {k:<width$}  {v}\n"));
        }
        out
    }
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
    match v {
        Value::Null => {}
        Value::Object(map) => {
            for (k, x) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, rows);
            }
        }
        Value::Array(items) if items.iter().any(|x| x.is_object() || x.is_array()) => {
            for (i, x) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), x, rows);
            }
        }
        Value::Array(items) => {
            let parts: Vec<String> = items.iter().map(scalar_text).collect();
            rows.push((prefix.to_string(), format!("[{}]", parts.join(", "))));
        }
        _ => rows.push((prefix.to_string(), scalar_text(v))),
    }
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => format!("{x:?}"),
            _ => n.to_string(),
        },
        other => other.to_string(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessJson {
    pub kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub branch: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_branch: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi_branch: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi: Option<f64>,
}

impl From<&Witness> for WitnessJson {
    fn from(w: &Witness) -> Self {
        let mut j = WitnessJson {
            kind: "",
            branch: None,
            x_branch: None,
            xi_branch: None,
            theta: None,
            x: None,
            xi: None,
        };
        match w {
            Witness::Circle { branch, theta } => {
                j.kind = "circle";
                j.branch = Some(branch.to_string());
                j.theta = Some(*theta);
            }
            Witness::SgInterior { xi_branch, x } => {
                j.kind = "sg-interior";
                j.xi_branch = Some(xi_branch.to_string());
                j.x = Some(*x);
            }
            Witness::SgExit { x_branch, xi } => {
                j.kind = "sg-exit";
                j.x_branch = Some(x_branch.to_string());
                j.xi = Some(*xi);
            }
            Witness::SgCorner { x_branch, xi_branch } => {
                j.kind = "sg-corner";
                j.x_branch = Some(x_branch.to_string());
                j.xi_branch = Some(xi_branch.to_string());
            }
        }
        j
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateJson {
    pub verdict: &'static str,
    pub min_singular_value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub argmin: Option<WitnessJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source_rank: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_rank: Option<usize>,
    pub grid: usize,
    pub cond: f64,
}

impl From<&Certificate> for CertificateJson {
    fn from(c: &Certificate) -> Self {
        let (verdict, witness, ranks) = match &c.verdict {
            Verdict::Elliptic => ("elliptic", None, None),
            Verdict::NotElliptic { witness } => ("not elliptic", Some(witness.into()), None),
            Verdict::RankMismatch {
                source_rank,
                target_rank,
                witness,
            } => ("rank mismatch", Some(witness.into()), Some((*source_rank, *target_rank))),
        };
        CertificateJson {
            verdict,
            min_singular_value: c.min_singular_value,
            argmin: c.argmin.as_ref().map(Into::into),
            witness,
            source_rank: ranks.map(|r| r.0),
            target_rank: ranks.map(|r| r.1),
            grid: c.grid,
            cond: c.cond,
        }
    }
}

/// Rounds to 12 significant digits for display; reports keep full values.
fn display(x: f64) -> f64 {
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// `"elliptic, min singular value 1.0"` and its negative counterparts.
pub fn certificate_summary(c: &Certificate) -> String {
    match &c.verdict {
        Verdict::Elliptic => format!("elliptic, min singular value {:?}", display(c.min_singular_value)),
        Verdict::NotElliptic { witness } => format!("not elliptic at {witness}"),
        Verdict::RankMismatch {
            source_rank,
            target_rank,
            witness,
        } => format!("not elliptic: restricted ranks {source_rank} -> {target_rank} at {witness}"),
    }
}
