use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::config::ExperimentConfig;
use crate::error::Result;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// A rectangular block of numbers. NaN marks a cell with no estimate and
/// serializes as JSON null.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// One column by name.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }
}

/// A least-squares line with a two-sided confidence interval on the slope.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fit {
    pub name: String,
    pub slope: f64,
    pub slope_se: f64,
    pub intercept: f64,
    pub ci_level: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub points: usize,
}

/// Outcome of one acceptance check. `checks` says which part of the
/// mathematical statement the verdict tests.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub criterion: u32,
    pub name: String,
    pub passed: bool,
    pub checks: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub experiment: String,
    pub config: ExperimentConfig,
    pub tables: Vec<Table>,
    pub fits: Vec<Fit>,
    pub verdicts: Vec<Verdict>,
    pub notes: Vec<String>,
}

impl ExperimentReport {
    pub fn new(experiment: &str, config: &ExperimentConfig) -> Self {
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            experiment: experiment.to_string(),
            config: config.clone(),
            tables: Vec::new(),
            fits: Vec::new(),
            verdicts: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn verdict(&mut self, criterion: u32, name: &str, passed: bool, checks: &str, detail: String) {
        self.verdicts.push(Verdict {
            criterion,
            name: name.to_string(),
            passed,
            checks: checks.to_string(),
            detail,
        });
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    /// True when every verdict passed (and there is at least one).
    pub fn passed(&self) -> bool {
        !self.verdicts.is_empty() && self.verdicts.iter().all(|v| v.passed)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn fit(&self, name: &str) -> Option<&Fit> {
        self.fits.iter().find(|f| f.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// All tables in long form: `schema_version,experiment,table,row,column,value`.
    pub fn write_tables_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["schema_version", "experiment", "table", "row", "column", "value"])?;
        let version = self.schema_version.to_string();
        for t in &self.tables {
            for (i, row) in t.rows.iter().enumerate() {
                for (c, v) in t.columns.iter().zip(row) {
                    w.write_record([&version, &self.experiment, &t.name, &i.to_string(), c, &fmt_value(*v)])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Fits and verdicts as one CSV: `kind,name,criterion,passed,value,low,high,detail`.
    pub fn write_summary_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["schema_version", "kind", "name", "criterion", "passed", "value", "low", "high", "detail"])?;
        let version = self.schema_version.to_string();
        for f in &self.fits {
            w.write_record([
                &version,
                "fit",
                &f.name,
                "",
                "",
                &fmt_value(f.slope),
                &fmt_value(f.ci_low),
                &fmt_value(f.ci_high),
                &format!("se {} intercept {} points {}", fmt_value(f.slope_se), fmt_value(f.intercept), f.points),
            ])?;
        }
        for v in &self.verdicts {
            w.write_record([
                &version,
                "verdict",
                &v.name,
                &v.criterion.to_string(),
                &v.passed.to_string(),
                "",
                "",
                "",
                &format!("{}: {}", v.checks, v.detail),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes `<experiment>.json`, or `<experiment>.csv` plus
    /// `<experiment>_summary.csv`, into `dir`. Returns the paths written.
    pub fn write_to_dir(&self, dir: &Path, format: ReportFormat) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        match format {
            ReportFormat::Json => {
                let path = dir.join(format!("{}.json", self.experiment));
                std::fs::write(&path, self.to_json()? + "\n")?;
                Ok(vec![path])
            }
            ReportFormat::Csv => {
                let tables = dir.join(format!("{}.csv", self.experiment));
                let summary = dir.join(format!("{}_summary.csv", self.experiment));
                self.write_tables_csv(std::fs::File::create(&tables)?)?;
                self.write_summary_csv(std::fs::File::create(&summary)?)?;
                Ok(vec![tables, summary])
            }
        }
    }

    /// Short human-readable digest: fits and one line per verdict.
    pub fn summary(&self) -> String {
        let mut s = format!("{}\n", self.experiment);
        for f in &self.fits {
            s += &format!(
                "  fit {}: slope {:.4} ± {:.4} ({:.0}% CI [{:.4}, {:.4}], {} points)\n",
                f.name,
                f.slope,
                f.slope_se,
                100.0 * f.ci_level,
                f.ci_low,
                f.ci_high,
                f.points
            );
        }
        for n in &self.notes {
            s += &format!("  note: {n}\n");
        }
        for v in &self.verdicts {
            let tag = if v.passed { "PASS" } else { "FAIL" };
            s += &format!("  [{tag}] criterion {} {}: {} ({})\n", v.criterion, v.name, v.detail, v.checks);
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ReportFormat {
    Csv,
    Json,
}

fn fmt_value(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v:e}")
    }
}
