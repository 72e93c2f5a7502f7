//! Serializable reports: closeness tables, suite outcomes, count results.

use std::path::Path;

use dgslab_core::verify::{ClosenessReport, PointRow};
use serde::Serialize;

use crate::audit::AuditSummary;
use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointRecord {
    pub key: String,
    pub count: u64,
    pub ideal: f64,
    pub empirical: f64,
    pub ratio: Option<f64>,
    pub ratio_lo: Option<f64>,
    pub ratio_hi: Option<f64>,
}

impl From<&PointRow> for PointRecord {
    fn from(r: &PointRow) -> Self {
        Self {
            key: r.key.clone(),
            count: r.count,
            ideal: r.ideal,
            empirical: r.empirical,
            ratio: r.ratio,
            ratio_lo: r.ratio_window.map(|w| w.0),
            ratio_hi: r.ratio_window.map(|w| w.1),
        }
    }
}

/// JSON form of a [`ClosenessReport`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClosenessRecord {
    pub label: String,
    pub statistical_distance: f64,
    pub distance_limit: f64,
    pub max_likelihood_ratio: f64,
    pub gamma_budget: f64,
    pub eps_budget: f64,
    pub se_slack: f64,
    pub z: f64,
    pub total: u64,
    pub support_size: usize,
    pub heavy_points: usize,
    pub heavy_failures: usize,
    pub outside_truncation: f64,
    pub pass: bool,
    pub rows: Vec<PointRecord>,
}

impl ClosenessRecord {
    pub fn new(label: impl Into<String>, r: &ClosenessReport) -> Self {
        Self {
            label: label.into(),
            statistical_distance: r.statistical_distance,
            distance_limit: r.eps_budget + (1.0 - 1.0 / r.gamma_budget) + r.se_slack,
            max_likelihood_ratio: r.max_likelihood_ratio,
            gamma_budget: r.gamma_budget,
            eps_budget: r.eps_budget,
            se_slack: r.se_slack,
            z: r.z,
            total: r.total,
            support_size: r.support_size,
            heavy_points: r.heavy_points,
            heavy_failures: r.heavy_failures,
            outside_truncation: r.outside_truncation,
            pass: r.pass,
            rows: r.rows.iter().map(PointRecord::from).collect(),
        }
    }
}

/// Per-point tables as CSV, one row per (case, point): rational keys, integer counts.
pub fn closeness_csv(records: &[ClosenessRecord]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["case", "point", "count", "ideal", "empirical", "ratio", "ratio_lo", "ratio_hi"])
        .map_err(csv_err)?;
    let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
    for rec in records {
        for r in &rec.rows {
            w.write_record([
                rec.label.clone(),
                r.key.clone(),
                r.count.to_string(),
                r.ideal.to_string(),
                r.empirical.to_string(),
                opt(r.ratio),
                opt(r.ratio_lo),
                opt(r.ratio_hi),
            ])
            .map_err(csv_err)?;
        }
    }
    finish(w)
}

/// Two-column CSV.
pub fn pairs_csv<A: ToString, B: ToString>(header: [&str; 2], rows: impl IntoIterator<Item = (A, B)>) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(csv_err)?;
    for (a, b) in rows {
        w.write_record([a.to_string(), b.to_string()]).map_err(csv_err)?;
    }
    finish(w)
}

fn finish(w: csv::Writer<Vec<u8>>) -> CliResult<String> {
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Io(e.to_string())
}

/// A scalar checked against an interval.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub label: String,
    pub observed: f64,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub pass: bool,
}

impl Check {
    pub fn within(label: impl Into<String>, observed: f64, lo: f64, hi: f64) -> Self {
        Self { label: label.into(), observed, lo: Some(lo), hi: Some(hi), pass: observed >= lo && observed <= hi }
    }

    pub fn at_most(label: impl Into<String>, observed: f64, hi: f64) -> Self {
        Self { label: label.into(), observed, lo: None, hi: Some(hi), pass: observed <= hi }
    }

    pub fn at_least(label: impl Into<String>, observed: f64, lo: f64) -> Self {
        Self { label: label.into(), observed, lo: Some(lo), hi: None, pass: observed >= lo }
    }

    /// Exact comparisons, reported as 0/1.
    pub fn holds(label: impl Into<String>, ok: bool) -> Self {
        Self { label: label.into(), observed: ok as u8 as f64, lo: Some(1.0), hi: None, pass: ok }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionReport {
    pub id: u8,
    pub title: String,
    pub pass: bool,
    pub seconds: f64,
    pub checks: Vec<Check>,
    pub closeness: Vec<ClosenessRecord>,
}

impl CriterionReport {
    pub fn new(id: u8, title: &str) -> Self {
        Self { id, title: title.into(), pass: true, seconds: 0.0, checks: Vec::new(), closeness: Vec::new() }
    }

    pub fn check(&mut self, c: Check) {
        self.pass &= c.pass;
        self.checks.push(c);
    }

    pub fn closeness(&mut self, label: impl Into<String>, r: &ClosenessReport) {
        self.pass &= r.pass;
        self.closeness.push(ClosenessRecord::new(label, r));
    }

    /// The first failing item, for one-line summaries.
    pub fn first_failure(&self) -> Option<String> {
        if let Some(c) = self.checks.iter().find(|c| !c.pass) {
            return Some(format!("{}: {} outside [{:?}, {:?}]", c.label, c.observed, c.lo, c.hi));
        }
        self.closeness.iter().find(|c| !c.pass).map(|c| {
            format!(
                "{}: SD {:.4} (limit {:.4}), {} of {} heavy points outside their window",
                c.label, c.statistical_distance, c.distance_limit, c.heavy_failures, c.heavy_points
            )
        })
    }

    pub fn summary_line(&self) -> String {
        let status = if self.pass { "PASS" } else { "FAIL" };
        let detail = self.first_failure().unwrap_or_else(|| format!("{} checks", self.checks.len() + self.closeness.len()));
        format!("criterion {:>2} {status}  {} ({detail}; {:.1}s)", self.id, self.title, self.seconds)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub samples: u64,
    pub pass: bool,
    pub criteria: Vec<CriterionReport>,
    pub audit: AuditSummary,
}

impl SuiteReport {
    pub fn write_json(&self, path: &Path) -> CliResult<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| CliError::Io(e.to_string()))?;
        std::fs::write(path, text + "\n").map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    }
}

/// Output of the `count` command.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CountReport {
    pub estimate: u64,
    pub lower_factor: f64,
    pub method: String,
}
