//! Audit reports and their json, csv and text renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default tolerance of identity checks.
pub const IDENTITY_TOL: f64 = 1e-10;
/// Default tolerance of inequality checks.
pub const INEQUALITY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// `|lhs − rhs| ≤ tolerance`.
    Identity,
    /// `lhs ≤ rhs` up to `tolerance`.
    Inequality,
}

/// One numeric check. `slack` is `rhs − lhs` for inequalities and
/// `−|lhs − rhs|` for identities, so a check passes iff
/// `slack ≥ −tolerance`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub kind: CheckKind,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn identity(name: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let slack = -(lhs - rhs).abs();
        Check { name: name.into(), kind: CheckKind::Identity, lhs, rhs, slack, tolerance, pass: slack >= -tolerance }
    }

    /// `lhs ≤ rhs + tolerance`.
    pub fn at_most(name: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let slack = rhs - lhs;
        Check { name: name.into(), kind: CheckKind::Inequality, lhs, rhs, slack, tolerance, pass: slack >= -tolerance }
    }

    /// `lhs ≥ rhs − tolerance`, stored as `rhs ≤ lhs`.
    pub fn at_least(name: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        Self::at_most(name, rhs, lhs, tolerance)
    }

    /// Identity check on the worst of many `(lhs, rhs)` pairs.
    pub fn worst_identity(name: impl Into<String>, pairs: impl IntoIterator<Item = (f64, f64)>, tol: f64) -> Self {
        let worst = pairs
            .into_iter()
            .max_by(|a, b| residual(*a).total_cmp(&residual(*b)))
            .unwrap_or((0.0, 0.0));
        Self::identity(name, worst.0, worst.1, tol)
    }

    /// `lhs ≤ rhs` check on the pair with the smallest slack.
    pub fn worst_at_most(name: impl Into<String>, pairs: impl IntoIterator<Item = (f64, f64)>, tol: f64) -> Self {
        let worst = pairs
            .into_iter()
            .min_by(|a, b| slack_of(*a).total_cmp(&slack_of(*b)))
            .unwrap_or((0.0, 0.0));
        Self::at_most(name, worst.0, worst.1, tol)
    }
}

// NaN sorts as the worst case in both directions
fn residual((a, b): (f64, f64)) -> f64 {
    let r = (a - b).abs();
    if r.is_nan() {
        f64::INFINITY
    } else {
        r
    }
}

fn slack_of((a, b): (f64, f64)) -> f64 {
    let s = b - a;
    if s.is_nan() {
        f64::NEG_INFINITY
    } else {
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub case: String,
    pub tag: String,
    pub seed: u64,
    pub dim_cap: usize,
    pub params: BTreeMap<String, serde_json::Value>,
    pub checks: Vec<Check>,
    /// Reported quantities such as `ε`, `α` and best-attack `δ` lower bounds.
    pub values: BTreeMap<String, f64>,
    /// Set when the case stopped early, e.g. on a dimension cap.
    pub error: Option<String>,
    pub wall_time_s: f64,
    pub version: String,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.checks.iter().all(|c| c.pass)
    }

    pub fn pass_count(&self) -> usize {
        self.checks.iter().filter(|c| c.pass).count()
    }

    pub fn fail_count(&self) -> usize {
        self.checks.len() - self.pass_count()
    }

    /// The report with wall time zeroed, for determinism comparisons.
    pub fn without_timing(&self) -> AuditReport {
        AuditReport { wall_time_s: 0.0, ..self.clone() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
    Text,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            "text" | "txt" => Ok(ReportFormat::Text),
            other => Err(Error::Parse(format!("unknown report format {other:?}"))),
        }
    }
}

pub fn emit_report(report: &AuditReport, format: ReportFormat) -> Result<Vec<u8>> {
    match format {
        ReportFormat::Json => Ok(serde_json::to_vec_pretty(report)?),
        _ => emit_reports(std::slice::from_ref(report), format),
    }
}

/// Several reports in one document: a json array, one csv table, or
/// consecutive text blocks.
pub fn emit_reports(reports: &[AuditReport], format: ReportFormat) -> Result<Vec<u8>> {
    match format {
        ReportFormat::Json => Ok(serde_json::to_vec_pretty(reports)?),
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["case", "check", "kind", "lhs", "rhs", "slack", "tolerance", "pass"])?;
            for r in reports {
                for c in &r.checks {
                    let kind = match c.kind {
                        CheckKind::Identity => "identity",
                        CheckKind::Inequality => "inequality",
                    };
                    w.write_record([
                        r.case.clone(),
                        c.name.clone(),
                        kind.to_string(),
                        format!("{:e}", c.lhs),
                        format!("{:e}", c.rhs),
                        format!("{:e}", c.slack),
                        format!("{:e}", c.tolerance),
                        c.pass.to_string(),
                    ])?;
                }
            }
            w.into_inner().map_err(|e| Error::Io(e.into_error()))
        }
        ReportFormat::Text => {
            let mut out = String::new();
            for r in reports {
                render_text(&mut out, r);
            }
            Ok(out.into_bytes())
        }
    }
}

fn render_text(out: &mut String, r: &AuditReport) {
    let status = if r.passed() { "PASS" } else { "FAIL" };
    let _ = writeln!(out, "{} [{}] {status}  seed={} dim_cap={} time={:.3}s", r.case, r.tag, r.seed, r.dim_cap, r.wall_time_s);
    if let Some(e) = &r.error {
        let _ = writeln!(out, "  error: {e}");
    }
    let width = r.checks.iter().map(|c| c.name.len()).max().unwrap_or(5).max(5);
    if !r.checks.is_empty() {
        let _ = writeln!(out, "  {:<width$}  {:>14}  {:>14}  {:>11}  {:>8}  ok", "check", "lhs", "rhs", "slack", "tol");
    }
    for c in &r.checks {
        let _ = writeln!(
            out,
            "  {:<width$}  {:>14.9e}  {:>14.9e}  {:>11.3e}  {:>8.1e}  {}",
            c.name,
            c.lhs,
            c.rhs,
            c.slack,
            c.tolerance,
            if c.pass { "yes" } else { "NO" }
        );
    }
    for (k, v) in &r.values {
        let _ = writeln!(out, "  value {k} = {v:.12}");
    }
    let _ = writeln!(out, "  {} passed, {} failed", r.pass_count(), r.fail_count());
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(checks: Vec<Check>) -> AuditReport {
        AuditReport {
            case: "T00".into(),
            tag: "test".into(),
            seed: 1,
            dim_cap: 256,
            params: BTreeMap::new(),
            checks,
            values: BTreeMap::new(),
            error: None,
            wall_time_s: 0.5,
            version: "0".into(),
        }
    }

    #[test]
    fn check_pass_rules() {
        assert!(Check::identity("a", 1.0, 1.0 + 1e-11, 1e-10).pass);
        assert!(!Check::identity("a", 1.0, 1.1, 1e-10).pass);
        assert!(Check::at_most("b", 1.0 + 1e-10, 1.0, 1e-9).pass);
        assert!(!Check::at_most("b", 2.0, 1.0, 1e-9).pass);
        assert!(Check::at_least("c", 1.0, 0.5, 0.0).pass);
        assert!(!Check::identity("nan", f64::NAN, 0.0, 1.0).pass);
        let w = Check::worst_at_most("w", [(0.0, 1.0), (0.9, 1.0), (0.2, 1.0)], 0.0);
        assert_eq!(w.lhs, 0.9);
        let w = Check::worst_identity("w", [(0.0, 1e-12), (f64::NAN, 0.0)], 1.0);
        assert!(!w.pass);
    }

    #[test]
    fn empty_report_is_valid_json() {
        let r = report(vec![]);
        let bytes = emit_report(&r, ReportFormat::Json).unwrap();
        let back: AuditReport = serde_json::from_slice(&bytes).unwrap();
        assert_eq!(back.checks.len(), 0);
        assert!(back.passed());
    }

    #[test]
    fn counts_and_csv_rows() {
        let r = report(vec![Check::identity("x", 0.0, 0.0, 0.0), Check::at_most("y", 2.0, 1.0, 0.0)]);
        assert_eq!(r.pass_count() + r.fail_count(), r.checks.len());
        let csv = String::from_utf8(emit_report(&r, ReportFormat::Csv).unwrap()).unwrap();
        assert_eq!(csv.lines().count(), r.checks.len() + 1);
        let text = String::from_utf8(emit_report(&r, ReportFormat::Text).unwrap()).unwrap();
        assert!(text.contains("FAIL") && text.contains("1 passed, 1 failed"));
    }

    #[test]
    fn format_parsing() {
        assert_eq!("JSON".parse::<ReportFormat>().unwrap(), ReportFormat::Json);
        assert!("xml".parse::<ReportFormat>().is_err());
    }
}
