//! Report rows and their CSV/stdout rendering.
//!
//! The CSV schema is fixed: `experiment,t,resolution,metric,value,tolerance,pass`.
//! Values and tolerances are printed with `{:.12e}` so identical configs
//! produce byte-identical files. Error-like metrics pass when
//! `value <= tolerance`; slack-like metrics (lower bounds) pass when
//! `value >= tolerance`. The direction is fixed per metric, not encoded in
//! the file.

use std::io::Write;
use std::path::Path;

#[derive(Debug, Clone)]
pub struct ReportRow {
    pub experiment: String,
    pub t: f64,
    pub resolution: usize,
    pub metric: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl ReportRow {
    /// Row that passes when `value <= tolerance` (errors, residuals).
    pub fn upper(
        experiment: impl Into<String>,
        t: f64,
        resolution: usize,
        metric: impl Into<String>,
        value: f64,
        tolerance: f64,
    ) -> Self {
        ReportRow {
            experiment: experiment.into(),
            t,
            resolution,
            metric: metric.into(),
            value,
            tolerance,
            pass: value <= tolerance,
        }
    }

    /// Row that passes when `value >= tolerance` (slacks, eigenvalues,
    /// boolean certificates encoded as 0/1 against tolerance 1).
    pub fn lower(
        experiment: impl Into<String>,
        t: f64,
        resolution: usize,
        metric: impl Into<String>,
        value: f64,
        tolerance: f64,
    ) -> Self {
        ReportRow {
            experiment: experiment.into(),
            t,
            resolution,
            metric: metric.into(),
            value,
            tolerance,
            pass: value >= tolerance,
        }
    }

    fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{:.12e},{:.12e},{}",
            self.experiment, self.t, self.resolution, self.metric, self.value, self.tolerance,
            self.pass
        )
    }
}

pub const CSV_HEADER: &str = "experiment,t,resolution,metric,value,tolerance,pass";

pub fn write_csv(path: &Path, rows: &[ReportRow]) -> std::io::Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "{CSV_HEADER}")?;
    for row in rows {
        writeln!(out, "{}", row.csv_line())?;
    }
    out.flush()
}

/// Aligned human-readable table plus the pass count; returns whether every
/// row passed.
pub fn print_summary(rows: &[ReportRow]) -> bool {
    let metric_width = rows.iter().map(|r| r.metric.len()).max().unwrap_or(6);
    for row in rows {
        println!(
            "{}  t={:<5} res={:<6} {:<metric_width$}  {:>13.6e}  (tol {:>10.3e})  {}",
            row.experiment,
            row.t,
            row.resolution,
            row.metric,
            row.value,
            row.tolerance,
            if row.pass { "pass" } else { "FAIL" },
        );
    }
    let passed = rows.iter().filter(|r| r.pass).count();
    println!("{passed}/{} rows pass", rows.len());
    passed == rows.len()
}
