//! Experiment records and their CSV / JSON renderings.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::Result;

/// One CSV cell.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format!("{v:?}"),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Float)
    }
}

/// Pass/fail assertion. `value` is compared against `tolerance` in the sense
/// described by `detail`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Flag {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

/// Fitted or extrapolated coefficients with uncertainty estimates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Fit {
    pub name: String,
    pub basis: Vec<String>,
    pub coefficients: Vec<f64>,
    /// Standard error or ladder error bar per coefficient; `NaN` when the
    /// data leave no degrees of freedom.
    pub deltas: Vec<f64>,
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub fits: Vec<Fit>,
    pub flags: Vec<Flag>,
    /// Scalar results that do not belong in the table.
    pub summary: BTreeMap<String, Value>,
    pub notes: Vec<String>,
    /// Fully resolved configuration of the run.
    pub config: Value,
    pub version: String,
}

impl ExperimentReport {
    pub fn new(name: &str, columns: &[&str], config: Value) -> Self {
        ExperimentReport {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            fits: Vec::new(),
            flags: Vec::new(),
            summary: BTreeMap::new(),
            notes: Vec::new(),
            config,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn flag(&mut self, name: &str, passed: bool, value: f64, tolerance: f64, detail: impl Into<String>) {
        self.flags.push(Flag {
            name: name.to_string(),
            passed,
            value,
            tolerance,
            detail: detail.into(),
        });
    }

    pub fn set(&mut self, key: &str, value: impl Serialize) {
        self.summary
            .insert(key.to_string(), serde_json::to_value(value).unwrap_or(Value::Null));
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn passed(&self) -> bool {
        self.flags.iter().all(|f| f.passed)
    }

    pub fn failed_flags(&self) -> Vec<&Flag> {
        self.flags.iter().filter(|f| !f.passed).collect()
    }

    pub fn get_flag(&self, name: &str) -> Option<&Flag> {
        self.flags.iter().find(|f| f.name == name)
    }

    /// Float column `name` of every row, `None` for empty cells.
    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let c = self.columns.iter().position(|n| n == name)?;
        Some(
            self.rows
                .iter()
                .map(|r| match &r[c] {
                    Cell::Float(v) => Some(*v),
                    Cell::Int(v) => Some(*v as f64),
                    _ => None,
                })
                .collect(),
        )
    }

    /// Adds the flags, fits and summary of `other`, prefixed by its name.
    pub fn absorb(&mut self, other: &ExperimentReport) {
        for f in &other.flags {
            let mut f = f.clone();
            f.name = format!("{}.{}", other.name, f.name);
            self.flags.push(f);
        }
        for fit in &other.fits {
            let mut fit = fit.clone();
            fit.name = format!("{}.{}", other.name, fit.name);
            self.fits.push(fit);
        }
        for (k, v) in &other.summary {
            self.summary.insert(format!("{}.{}", other.name, k), v.clone());
        }
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Fits, flags, summary and config echo; the table itself goes to CSV.
    pub fn summary_json(&self) -> Value {
        json!({
            "name": self.name,
            "passed": self.passed(),
            "flags": self.flags,
            "fits": self.fits,
            "summary": self.summary,
            "notes": self.notes,
            "rows": self.rows.len(),
            "config": self.config,
            "version": self.version,
        })
    }

    /// Writes `<name>.csv` and `<name>.json` into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        fs::create_dir_all(dir)?;
        let csv_path = dir.join(format!("{}.csv", self.name));
        let json_path = dir.join(format!("{}.json", self.name));
        fs::write(&csv_path, self.to_csv()?)?;
        fs::write(&json_path, serde_json::to_string_pretty(&self.summary_json())? + "\n")?;
        Ok((csv_path, json_path))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quotes_and_floats() {
        let mut r = ExperimentReport::new("t", &["a", "b", "c"], Value::Null);
        r.push_row(vec![1.5.into(), "x,y".into(), Cell::Empty]);
        r.push_row(vec![1e-20.into(), 3usize.into(), true.into()]);
        assert_eq!(r.to_csv().unwrap(), "a,b,c\n1.5,\"x,y\",\n1e-20,3,true\n");
    }

    #[test]
    fn flags_decide_pass() {
        let mut r = ExperimentReport::new("t", &[], Value::Null);
        r.flag("ok", true, 0.0, 1.0, "");
        assert!(r.passed());
        r.flag("bad", false, 2.0, 1.0, "");
        assert!(!r.passed());
        assert_eq!(r.failed_flags().len(), 1);
    }
}
