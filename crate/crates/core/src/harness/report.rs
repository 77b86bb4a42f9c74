//! Report tables and their CSV / JSON / log-log emission.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ExperimentSpec;
use crate::error::{Error, Result};
use crate::pathgen::fmt17;

/// One pass/fail line: `value` must lie in `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// `None` when the statistic is undefined (too few replicates).
    pub value: Option<f64>,
    pub lo: f64,
    pub hi: f64,
    pub passed: bool,
}

impl Check {
    pub fn within(name: impl Into<String>, value: Option<f64>, lo: f64, hi: f64) -> Self {
        let passed = value.is_some_and(|v| v >= lo && v <= hi);
        Check {
            name: name.into(),
            value,
            lo,
            hi,
            passed,
        }
    }

    pub fn line(&self) -> String {
        let v = self.value.map_or("undefined".to_string(), |v| format!("{v:.6}"));
        format!(
            "{} {}: {v} in [{}, {}]",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            bound(self.lo),
            bound(self.hi)
        )
    }
}

/// Short form of a tolerance bound: at most 6 decimals, trailing zeros dropped.
fn bound(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{x:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    /// Undefined cells (non-finite statistics) are `None`.
    pub rows: Vec<Vec<Option<f64>>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows
            .push(row.into_iter().map(|v| v.is_finite().then_some(v)).collect());
    }

    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }
}

/// Positive `(x, y)` pairs meant for a log-log plot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub kind: String,
    pub spec: ExperimentSpec,
    pub checks: Vec<Check>,
    pub tables: Vec<Table>,
    pub loglog: Vec<Series>,
    pub notes: Vec<String>,
}

impl ExperimentReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn is_empty(&self) -> bool {
        self.checks.is_empty() && self.tables.iter().all(|t| t.rows.is_empty()) && self.loglog.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    LogLog,
}

pub const ALL_FORMATS: [Format; 3] = [Format::Csv, Format::Json, Format::LogLog];

fn write_file(path: &Path, body: &str) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(body.as_bytes()).map_err(|e| Error::io(path, e))
}

pub fn table_csv(t: &Table) -> String {
    let mut s = t.columns.join(",");
    s.push('\n');
    for row in &t.rows {
        let cells: Vec<String> = row.iter().map(|v| v.map_or(String::new(), fmt17)).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

pub fn series_dat(s: &Series) -> String {
    let mut out = format!("# {}\n# x y ln_x ln_y\n", s.name);
    for &(x, y) in &s.points {
        out.push_str(&format!(
            "{} {} {} {}\n",
            fmt17(x),
            fmt17(y),
            fmt17(x.ln()),
            fmt17(y.ln())
        ));
    }
    out
}

/// Writes `<table>.csv`, `summary.json` and `<series>.dat` under `dir`.
/// Returns the written paths in a fixed order.
pub fn emit_report(report: &ExperimentReport, dir: &Path, formats: &[Format]) -> Result<Vec<PathBuf>> {
    if report.is_empty() {
        return Err(Error::NothingToEmit);
    }
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    if formats.contains(&Format::Csv) {
        for t in &report.tables {
            let p = dir.join(format!("{}.csv", t.name));
            write_file(&p, &table_csv(t))?;
            written.push(p);
        }
    }
    if formats.contains(&Format::Json) {
        let p = dir.join("summary.json");
        let mut body = serde_json::to_string_pretty(report)?;
        body.push('\n');
        write_file(&p, &body)?;
        written.push(p);
    }
    if formats.contains(&Format::LogLog) {
        for s in &report.loglog {
            let p = dir.join(format!("{}.dat", s.name));
            write_file(&p, &series_dat(s))?;
            written.push(p);
        }
    }
    Ok(written)
}

pub fn read_summary(path: &Path) -> Result<ExperimentReport> {
    let body = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&body)?)
}
