//! The acceptance suite: twelve criteria, one CSV each plus a summary.

use std::path::Path;
use std::time::Instant;

use qrelent_core::combinatorics::DEFAULT_SEARCH_CAP;
use qrelent_core::semiclassical::BoundParams;

use crate::checks::{self, CancellationParams, ProductionParams, Tolerances, X_NORM_CASES};
use crate::error::{Result, EXIT_FAIL, EXIT_NUMERICAL, EXIT_PASS};
use crate::report::{fmt_f64, CheckRow, Report, Table};
use crate::scenario::default_n_grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Criterion {
    pub id: u8,
    pub name: &'static str,
}

pub const CRITERIA: [Criterion; 12] = [
    Criterion {
        id: 1,
        name: "cancellation-rule",
    },
    Criterion {
        id: 2,
        name: "combinatorial-chain",
    },
    Criterion {
        id: 3,
        name: "entropy-production",
    },
    Criterion {
        id: 4,
        name: "entropy-growth-bound",
    },
    Criterion {
        id: 5,
        name: "matrix-function-identities",
    },
    Criterion {
        id: 6,
        name: "metric-inequalities",
    },
    Criterion {
        id: 7,
        name: "x-norm-bound",
    },
    Criterion {
        id: 8,
        name: "partition-function-bound",
    },
    Criterion {
        id: 9,
        name: "semiclassical-scalars",
    },
    Criterion {
        id: 10,
        name: "quantization",
    },
    Criterion {
        id: 11,
        name: "integrator-order",
    },
    Criterion {
        id: 12,
        name: "determinism",
    },
];

pub const SUMMARY_COLUMNS: [&str; 6] = [
    "criterion",
    "name",
    "checks",
    "failed",
    "worst_margin",
    "pass",
];

pub const DEFAULT_SEED: u64 = 0;

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOptions {
    pub seed: u64,
    pub tolerances: Tolerances,
    /// Criterion ids to run; all when empty.
    pub only: Vec<u8>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            tolerances: Tolerances::default(),
            only: Vec::new(),
        }
    }
}

impl SuiteOptions {
    fn selected(&self) -> Vec<Criterion> {
        CRITERIA
            .iter()
            .copied()
            .filter(|c| self.only.is_empty() || self.only.contains(&c.id))
            .collect()
    }
}

/// Parses `1,3,5-7` into criterion ids.
pub fn parse_selection(text: &str) -> std::result::Result<Vec<u8>, String> {
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let bad = || format!("invalid criterion selection `{part}`");
        let (a, b) = match part.split_once('-') {
            Some((a, b)) => (
                a.trim().parse::<u8>().map_err(|_| bad())?,
                b.trim().parse::<u8>().map_err(|_| bad())?,
            ),
            None => {
                let x = part.parse::<u8>().map_err(|_| bad())?;
                (x, x)
            }
        };
        if a == 0 || b > 12 || a > b {
            return Err(format!("criterion range `{part}` outside 1..=12"));
        }
        out.extend(a..=b);
    }
    out.sort_unstable();
    out.dedup();
    if out.is_empty() {
        return Err("empty criterion selection".into());
    }
    Ok(out)
}

pub fn file_name(c: Criterion) -> String {
    format!("criterion-{:02}.csv", c.id)
}

fn criterion_rows(id: u8, seed: u64, tol: &Tolerances) -> qrelent_core::Result<Vec<CheckRow>> {
    match id {
        1 => checks::cancellation(&CancellationParams::default(), seed, tol),
        2 => checks::combinatorics(DEFAULT_SEARCH_CAP),
        3 => checks::production_identity(&ProductionParams::default(), seed, tol),
        4 => checks::entropy_growth(&[2, 3, 4], seed),
        5 => {
            let mut rows = checks::frechet_quadrature(100, seed, tol)?;
            rows.extend(checks::frechet_difference(100, seed + 1, tol)?);
            rows.extend(checks::commutator_log(100, seed + 2, tol)?);
            rows.extend(checks::golden_thompson(100, seed + 3, tol)?);
            rows.extend(checks::entropy_inequality(100, seed + 4, tol)?);
            Ok(rows)
        }
        6 => {
            let mut rows = checks::pinsker(100, seed, tol)?;
            rows.extend(checks::block_subadditivity(100, seed + 10, tol)?);
            Ok(rows)
        }
        7 => checks::x_norm(&X_NORM_CASES, seed, tol),
        8 => checks::partition_bound(10, seed, tol),
        9 => {
            let mut rows = checks::semiclassical_samples(100, 200, seed, tol)?;
            rows.extend(checks::envelope(
                &BoundParams::reference(),
                &default_n_grid(),
                tol,
            )?);
            Ok(rows)
        }
        10 => checks::quantization(5, 20, seed, tol),
        11 => checks::integrator_order(seed, tol),
        _ => unreachable!("criterion {id} has no direct rows"),
    }
}

fn criterion_report(c: Criterion, seed: u64, tol: &Tolerances) -> Report {
    let id = format!("criterion-{:02}", c.id);
    match criterion_rows(c.id, seed, tol) {
        Ok(rows) => Report::from_checks(&id, "suite", seed, &rows),
        Err(e) => Report::failed_with(&id, "suite", seed, c.name, &e),
    }
}

/// Runs criteria in parallel, one thread each; results keep suite order.
fn run_many(ids: &[Criterion], opts: &SuiteOptions, log: bool) -> Vec<Report> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = ids
            .iter()
            .map(|&c| {
                scope.spawn(move || {
                    let start = Instant::now();
                    let r = criterion_report(c, opts.seed, &opts.tolerances);
                    if log {
                        eprintln!(
                            "criterion {:>2} {:<28} {} in {:.1}s",
                            c.id,
                            c.name,
                            if r.passed { "pass" } else { "FAIL" },
                            start.elapsed().as_secs_f64()
                        );
                    }
                    r
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("criterion thread panicked"))
            .collect()
    })
}

/// Reruns the deterministic criteria and compares rendered bytes.
fn determinism_report(first: &[(Criterion, Report)], opts: &SuiteOptions) -> Result<Report> {
    let base: Vec<(Criterion, Vec<u8>)> = if first.is_empty() {
        let ids: Vec<Criterion> = CRITERIA[..11].to_vec();
        let reports = run_many(&ids, opts, false);
        ids.into_iter()
            .zip(reports)
            .map(|(c, r)| Ok((c, r.render()?)))
            .collect::<Result<_>>()?
    } else {
        first
            .iter()
            .map(|(c, r)| Ok((*c, r.render()?)))
            .collect::<Result<_>>()?
    };
    let ids: Vec<Criterion> = base.iter().map(|(c, _)| *c).collect();
    let again = run_many(&ids, opts, false);
    let mut rows = Vec::new();
    for ((c, bytes), r) in base.iter().zip(again) {
        let other = r.render()?;
        let same = *bytes == other;
        rows.push(CheckRow::exact(
            "byte-identical-rerun",
            file_name(*c),
            other.len() as f64,
            bytes.len() as f64,
            same,
        ));
    }
    Ok(Report::from_checks(
        "criterion-12",
        "suite",
        opts.seed,
        &rows,
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOutcome {
    pub reports: Vec<(Criterion, Report)>,
    pub summary: Report,
}

impl SuiteOutcome {
    pub fn exit_code(&self) -> u8 {
        if self.reports.iter().any(|(_, r)| r.error.is_some()) {
            EXIT_NUMERICAL
        } else if self.reports.iter().all(|(_, r)| r.passed) {
            EXIT_PASS
        } else {
            EXIT_FAIL
        }
    }

    pub fn write(&self, out: &Path) -> Result<()> {
        for (c, r) in &self.reports {
            r.write(&out.join(file_name(*c)))?;
        }
        self.summary.write(&out.join("summary.csv"))
    }
}

fn summarize(reports: &[(Criterion, Report)], seed: u64) -> Report {
    let mut table = Table::new(&SUMMARY_COLUMNS);
    for (c, r) in reports {
        let (checks, failed, worst) = if r.error.is_some() {
            (0, 1, f64::NAN)
        } else {
            let margin = r
                .table
                .columns
                .iter()
                .position(|&h| h == "margin")
                .expect("check table");
            let pass = r
                .table
                .columns
                .iter()
                .position(|&h| h == "pass")
                .expect("check table");
            let failed = r
                .table
                .rows
                .iter()
                .filter(|row| row[pass] != "true")
                .count();
            let worst = r
                .table
                .rows
                .iter()
                .map(|row| row[margin].parse::<f64>().unwrap_or(f64::NAN))
                .fold(f64::INFINITY, f64::min);
            (r.table.rows.len(), failed, worst)
        };
        table.push(vec![
            c.id.to_string(),
            c.name.into(),
            checks.to_string(),
            failed.to_string(),
            fmt_f64(worst),
            r.passed.to_string(),
        ]);
    }
    Report {
        id: "summary".into(),
        kind: "suite".into(),
        seed,
        passed: reports.iter().all(|(_, r)| r.passed),
        error: None,
        table,
    }
}

pub fn run_suite(opts: &SuiteOptions, log: bool) -> Result<SuiteOutcome> {
    let selected = opts.selected();
    let direct: Vec<Criterion> = selected.iter().copied().filter(|c| c.id != 12).collect();
    let mut reports: Vec<(Criterion, Report)> = direct
        .iter()
        .copied()
        .zip(run_many(&direct, opts, log))
        .collect();
    if let Some(&c12) = selected.iter().find(|c| c.id == 12) {
        let start = Instant::now();
        let r = determinism_report(&reports, opts)?;
        if log {
            eprintln!(
                "criterion 12 {:<28} {} in {:.1}s",
                c12.name,
                if r.passed { "pass" } else { "FAIL" },
                start.elapsed().as_secs_f64()
            );
        }
        reports.push((c12, r));
    }
    let summary = summarize(&reports, opts.seed);
    Ok(SuiteOutcome { reports, summary })
}
