//! JSON report documents.
//!
//! ```json
//! { "kind": "fit", "schema_version": "1.0", "payload": { ... }, "nonfinite": ["payload.r_squared"] }
//! ```
//!
//! Keys appear in declaration order. Values that are NaN or infinite are
//! written as `null` and their dotted paths listed in `nonfinite`, which is
//! omitted when empty.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagnostics::DiagnosticsReport;
use crate::estimation::FitResult;
use crate::model::AuditRecord;

pub const SCHEMA_VERSION: &str = "1.0";

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("report JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported schema_version {0:?}")]
    SchemaVersion(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportKind {
    Fit,
    Diagnostics,
    Audit,
    Eval,
    Gradient,
    Elasticity,
    Hessian,
    Reduce,
    Synth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub kind: ReportKind,
    pub schema_version: String,
    pub payload: serde_json::Value,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub nonfinite: Vec<String>,
}

impl ReportDocument {
    /// Wraps any serializable payload. `nonfinite` lists payload-relative
    /// paths (without the `payload.` prefix) of values that were undefined.
    pub fn new<T: Serialize>(
        kind: ReportKind,
        payload: &T,
        nonfinite: &[String],
    ) -> Result<Self, ReportError> {
        Ok(Self {
            kind,
            schema_version: SCHEMA_VERSION.to_string(),
            payload: serde_json::to_value(payload)?,
            nonfinite: nonfinite.iter().map(|p| format!("payload.{p}")).collect(),
        })
    }

    pub fn diagnostics(report: &DiagnosticsReport) -> Result<Self, ReportError> {
        Self::new(ReportKind::Diagnostics, report, &report.undefined_fields())
    }

    pub fn audit(record: &AuditRecord) -> Result<Self, ReportError> {
        let mut nonfinite = Vec::new();
        for (id, entry) in &record.entries {
            if entry.published_value.is_none() {
                nonfinite.push(format!("entries.{id}.published_value"));
            }
            if entry.computed_value.is_none() {
                nonfinite.push(format!("entries.{id}.computed_value"));
            }
        }
        Self::new(ReportKind::Audit, record, &nonfinite)
    }
}

/// Fit payload. Field order is the wire order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub industry_code: String,
    pub r_squared: Option<f64>,
    pub std_error: Option<f64>,
    pub substitution_elasticity: Option<f64>,
    pub delta: Option<f64>,
    pub sigma: Option<f64>,
    pub p: Option<f64>,
    pub q: Option<f64>,
    #[serde(rename = "A")]
    pub a: Option<f64>,
    pub rss: Option<f64>,
    pub converged: bool,
    pub n_obs: usize,
    pub n_iterations: usize,
    pub best_start_index: usize,
    pub seed: u64,
    pub schema_version: String,
}

impl FitReport {
    pub fn from_result(result: &FitResult, industry_code: &str, seed: u64) -> (Self, Vec<String>) {
        let mut nonfinite = Vec::new();
        let mut finite = |name: &str, v: f64| {
            if v.is_finite() {
                Some(v)
            } else {
                nonfinite.push(name.to_string());
                None
            }
        };
        let prm = &result.params;
        let report = FitReport {
            industry_code: industry_code.to_string(),
            r_squared: finite("r_squared", result.r_squared),
            std_error: finite("std_error", result.std_error),
            substitution_elasticity: finite(
                "substitution_elasticity",
                result.substitution_elasticity,
            ),
            delta: finite("delta", prm.delta()),
            sigma: finite("sigma", prm.sigma()),
            p: finite("p", prm.p()),
            q: finite("q", prm.q()),
            a: finite("A", prm.a()),
            rss: finite("rss", result.rss),
            converged: result.converged,
            n_obs: result.n_obs,
            n_iterations: result.n_iterations,
            best_start_index: result.best_start_index,
            seed,
            schema_version: SCHEMA_VERSION.to_string(),
        };
        (report, nonfinite)
    }

    /// The seven table columns R², StdError, elasticity of substitution,
    /// delta, sigma, RSS and convergence, tab separated, at table precision.
    pub fn table_row(&self) -> String {
        let num = |v: Option<f64>, digits: usize| match v {
            Some(x) => format!("{x:.digits$}"),
            None => "NA".to_string(),
        };
        [
            num(self.r_squared, 2),
            num(self.std_error, 2),
            num(self.substitution_elasticity, 1),
            num(self.delta, 2),
            num(self.sigma, 2),
            num(self.rss, 2),
            if self.converged {
                "Achieved".to_string()
            } else {
                "Not achieved".to_string()
            },
        ]
        .join("\t")
    }

    pub const TABLE_HEADER: &'static str =
        "R2\tStdError\tElasticity of Substitution\tdelta\tsigma\tRSS\tConvergence";
}

pub fn fit_document(
    result: &FitResult,
    industry_code: &str,
    seed: u64,
) -> Result<ReportDocument, ReportError> {
    let (report, nonfinite) = FitReport::from_result(result, industry_code, seed);
    ReportDocument::new(ReportKind::Fit, &report, &nonfinite)
}

/// Pretty-printed, newline-terminated.
pub fn write_report_json(doc: &ReportDocument) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(doc).expect("Value serialization cannot fail");
    out.push(b'\n');
    out
}

pub fn read_report_json(bytes: &[u8]) -> Result<ReportDocument, ReportError> {
    let doc: ReportDocument = serde_json::from_slice(bytes)?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(ReportError::SchemaVersion(doc.schema_version));
    }
    Ok(doc)
}
