//! Fixed-column CSV reports.

use std::fs;
use std::path::Path;

use crate::error::{HarnessError, Result};
use crate::scenario::SCHEMA;

/// Scientific notation with twelve fractional digits; locale independent.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.12e}")
    }
}

/// One inequality or tolerance check. `pass ⇔ margin ≥ −tolerance`.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub check: String,
    pub index: String,
    pub measured: f64,
    pub bound: f64,
    pub margin: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckRow {
    /// `measured ≤ bound` up to `tolerance`.
    pub fn upper(
        check: &str,
        index: impl Into<String>,
        measured: f64,
        bound: f64,
        tolerance: f64,
    ) -> Self {
        Self::with_margin(check, index, measured, bound, bound - measured, tolerance)
    }

    /// `measured ≥ bound` up to `tolerance`.
    pub fn lower(
        check: &str,
        index: impl Into<String>,
        measured: f64,
        bound: f64,
        tolerance: f64,
    ) -> Self {
        Self::with_margin(check, index, measured, bound, measured - bound, tolerance)
    }

    /// `lo ≤ measured ≤ hi`; the bound column holds the violated or nearer end.
    pub fn within(check: &str, index: impl Into<String>, measured: f64, lo: f64, hi: f64) -> Self {
        let (bound, margin) = if measured - lo <= hi - measured {
            (lo, measured - lo)
        } else {
            (hi, hi - measured)
        };
        Self {
            check: check.into(),
            index: index.into(),
            measured,
            bound,
            margin,
            tolerance: 0.0,
            pass: margin >= 0.0,
        }
    }

    /// Pass flag decided elsewhere, for exact comparisons. The margin is
    /// the distance to `bound`, negative when the check fails.
    pub fn exact(
        check: &str,
        index: impl Into<String>,
        measured: f64,
        bound: f64,
        pass: bool,
    ) -> Self {
        let gap = (bound - measured).abs();
        Self {
            check: check.into(),
            index: index.into(),
            measured,
            bound,
            margin: if pass { gap } else { -gap },
            tolerance: 0.0,
            pass,
        }
    }

    fn with_margin(
        check: &str,
        index: impl Into<String>,
        measured: f64,
        bound: f64,
        margin: f64,
        tolerance: f64,
    ) -> Self {
        Self {
            check: check.into(),
            index: index.into(),
            measured,
            bound,
            margin,
            tolerance,
            // NaN margins fail
            pass: margin >= -tolerance,
        }
    }
}

pub const CHECK_COLUMNS: [&str; 8] = [
    "scenario",
    "check",
    "index",
    "measured",
    "bound",
    "margin",
    "tolerance",
    "pass",
];

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn checks(scenario: &str, rows: &[CheckRow]) -> Self {
        let mut t = Self::new(&CHECK_COLUMNS);
        for r in rows {
            t.push(vec![
                scenario.into(),
                r.check.clone(),
                r.index.clone(),
                fmt_f64(r.measured),
                fmt_f64(r.bound),
                fmt_f64(r.margin),
                fmt_f64(r.tolerance),
                r.pass.to_string(),
            ]);
        }
        t
    }

    pub fn diagnostic(stage: &str, error: &dyn std::fmt::Display) -> Self {
        let mut t = Self::new(&["stage", "error"]);
        t.push(vec![stage.into(), error.to_string()]);
        t
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub id: String,
    pub kind: String,
    pub seed: u64,
    pub table: Table,
    pub passed: bool,
    /// Set when a numerical error stopped the run.
    pub error: Option<String>,
}

impl Report {
    pub fn from_checks(id: &str, kind: &str, seed: u64, rows: &[CheckRow]) -> Self {
        Self {
            id: id.into(),
            kind: kind.into(),
            seed,
            table: Table::checks(id, rows),
            passed: rows.iter().all(|r| r.pass),
            error: None,
        }
    }

    pub fn failed_with(
        id: &str,
        kind: &str,
        seed: u64,
        stage: &str,
        err: &dyn std::fmt::Display,
    ) -> Self {
        Self {
            id: id.into(),
            kind: kind.into(),
            seed,
            table: Table::diagnostic(stage, err),
            passed: false,
            error: Some(err.to_string()),
        }
    }

    pub fn exit_code(&self) -> u8 {
        use crate::error::{EXIT_FAIL, EXIT_NUMERICAL, EXIT_PASS};
        if self.error.is_some() {
            EXIT_NUMERICAL
        } else if self.passed {
            EXIT_PASS
        } else {
            EXIT_FAIL
        }
    }

    pub fn render(&self) -> Result<Vec<u8>> {
        let mut out = format!(
            "# schema={SCHEMA} scenario={} kind={} seed={}\n",
            self.id, self.kind, self.seed
        )
        .into_bytes();
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(&self.table.columns)?;
        for row in &self.table.rows {
            w.write_record(row)?;
        }
        w.flush().map_err(|e| HarnessError::io("<csv buffer>", e))?;
        drop(w);
        Ok(out)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
        }
        fs::write(path, self.render()?).map_err(|e| HarnessError::io(path, e))
    }
}
