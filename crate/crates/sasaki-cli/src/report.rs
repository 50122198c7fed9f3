//! Named checks, CSV rows and the JSON report with provenance.

use std::fs::{self, File};
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;

use crate::config::ExperimentConfig;

/// `git describe`-style identifier of this build.
pub const BUILD_ID: &str = env!("SASAKI_BUILD_ID");

/// One named check with its measured value and bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    /// Passes when `value ≤ bound`.
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value, bound, pass: value <= bound, detail: String::new() }
    }

    /// Passes when `value ≥ bound`.
    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value, bound, pass: value >= bound, detail: String::new() }
    }

    /// Passes when `pass` holds; `value` and `bound` are reported as given.
    pub fn flag(name: impl Into<String>, value: f64, bound: f64, pass: bool) -> Self {
        Self { name: name.into(), value, bound, pass, detail: String::new() }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    /// One line for the terminal.
    pub fn line(&self) -> String {
        let status = if self.pass { "PASS" } else { "FAIL" };
        let mut s = format!("[{status}] {}: value {:.6e}, bound {:.6e}", self.name, self.value, self.bound);
        if !self.detail.is_empty() {
            s.push_str(&format!(" ({})", self.detail));
        }
        s
    }
}

/// One CSV row. The first ten columns are the documented result columns; the
/// last three repeat the provenance of the run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub experiment: String,
    pub m: usize,
    pub r_k: Option<f64>,
    pub stratum: String,
    pub estimate: f64,
    pub stderr: f64,
    pub samples: usize,
    pub bound: Option<f64>,
    pub margin: Option<f64>,
    pub pass: Option<bool>,
    pub seed: u64,
    pub build_id: String,
    pub config_hash: String,
}

/// Fixed CSV header.
pub const CSV_COLUMNS: [&str; 13] = [
    "experiment",
    "m",
    "r_k",
    "stratum",
    "estimate",
    "stderr",
    "samples",
    "bound",
    "margin",
    "pass",
    "seed",
    "build_id",
    "config_hash",
];

/// Everything an experiment produced.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub experiment: String,
    pub seed: u64,
    pub build_id: String,
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub fault: Option<String>,
    pub checks: Vec<Check>,
    #[serde(skip)]
    pub rows: Vec<Row>,
    /// Experiment-specific payload, e.g. the comass arg-max frame.
    pub details: serde_json::Value,
}

impl Report {
    pub fn new(config: &ExperimentConfig, fault: Option<String>) -> Self {
        Self {
            experiment: config.experiment.name().into(),
            seed: config.seed,
            build_id: BUILD_ID.into(),
            config_hash: config.hash(),
            config: config.clone(),
            fault,
            checks: Vec::new(),
            rows: Vec::new(),
            details: serde_json::Value::Null,
        }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    /// Appends a row stamped with this run's provenance.
    #[allow(clippy::too_many_arguments)]
    pub fn row(
        &mut self,
        r_k: Option<f64>,
        stratum: &str,
        estimate: f64,
        stderr: f64,
        samples: usize,
        bound: Option<f64>,
        margin: Option<f64>,
        pass: Option<bool>,
    ) {
        self.rows.push(Row {
            experiment: self.experiment.clone(),
            m: self.config.m,
            r_k,
            stratum: stratum.into(),
            estimate,
            stderr,
            samples,
            bound,
            margin,
            pass,
            seed: self.seed,
            build_id: self.build_id.clone(),
            config_hash: self.config_hash.clone(),
        });
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Writes `<experiment>.csv` and `<experiment>.json` into `dir`.
    pub fn write(&self, dir: &Path) -> anyhow::Result<(PathBuf, PathBuf)> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let csv_path = dir.join(format!("{}.csv", self.experiment));
        let mut w = csv::Writer::from_path(&csv_path)?;
        if self.rows.is_empty() {
            w.write_record(CSV_COLUMNS)?;
        }
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        let json_path = dir.join(format!("{}.json", self.experiment));
        serde_json::to_writer_pretty(File::create(&json_path)?, self)?;
        Ok((csv_path, json_path))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Experiment;

    #[test]
    fn check_directions() {
        assert!(Check::at_most("a", 1.0, 1.0).pass);
        assert!(!Check::at_most("a", 1.1, 1.0).pass);
        assert!(Check::at_least("b", 1.0, 1.0).pass);
        assert!(!Check::at_least("b", f64::NAN, 0.0).pass);
        assert!(Check::at_most("c", 2.0, 1.0).with_detail("x").line().starts_with("[FAIL] c:"));
    }

    #[test]
    fn rows_carry_provenance_and_files_are_written() {
        let cfg = Experiment::Comass.default_config();
        let mut r = Report::new(&cfg, Some("c2".into()));
        r.row(Some(1e-2), "cap+", 1.0, 0.1, 10, Some(2.0), Some(-1.0), Some(false));
        r.push(Check::at_most("x", 0.0, 1.0));
        assert!(r.pass());
        assert_eq!(r.rows[0].config_hash, cfg.hash());
        assert_eq!(r.rows[0].seed, cfg.seed);
        let dir = tempfile::tempdir().unwrap();
        let (csv_path, json_path) = r.write(dir.path()).unwrap();
        let text = std::fs::read_to_string(csv_path).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_COLUMNS.join(","));
        let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(json_path).unwrap()).unwrap();
        assert_eq!(json["fault"], "c2");
    }
}
