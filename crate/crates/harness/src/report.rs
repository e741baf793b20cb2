//! Metric rows, report assembly, and artifact writing.
//!
//! Every checked quantity becomes a [`MetricRow`] with an explicit target,
//! tolerance, and verdict; the report as a whole passes only if every row
//! does. Serialization is deterministic: identical inputs produce identical
//! `report.json` bytes.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::Result;

/// How a metric's value is compared against its target.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// `|value − target| <= tolerance`.
    Within,
    /// `value <= target + tolerance`.
    AtMost,
    /// `value >= target − tolerance`.
    AtLeast,
}

/// One checked quantity.
#[derive(Clone, Debug, Serialize)]
pub struct MetricRow {
    pub name: String,
    pub value: f64,
    pub comparison: Comparison,
    pub target: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub note: String,
}

/// Outcome of one experiment: the echoed configuration, every metric row,
/// and the names of artifact files written alongside `report.json`.
#[derive(Debug, Serialize)]
pub struct Report {
    pub experiment: String,
    pub config: Value,
    pub metrics: Vec<MetricRow>,
    pub artifacts: Vec<String>,
    pub pass: bool,
}

impl Report {
    pub fn new(experiment: &str, config_echo: Value) -> Self {
        Report {
            experiment: experiment.to_string(),
            config: config_echo,
            metrics: Vec::new(),
            artifacts: Vec::new(),
            pass: true,
        }
    }

    fn push(&mut self, name: &str, value: f64, comparison: Comparison, target: f64, tolerance: f64, note: &str) -> bool {
        let pass = value.is_finite()
            && match comparison {
                Comparison::Within => (value - target).abs() <= tolerance,
                Comparison::AtMost => value <= target + tolerance,
                Comparison::AtLeast => value >= target - tolerance,
            };
        self.metrics.push(MetricRow {
            name: name.to_string(),
            value,
            comparison,
            target,
            tolerance,
            pass,
            note: note.to_string(),
        });
        self.pass &= pass;
        pass
    }

    /// Requires `|value − target| <= tolerance`.
    pub fn check_within(&mut self, name: &str, value: f64, target: f64, tolerance: f64, note: &str) -> bool {
        self.push(name, value, Comparison::Within, target, tolerance, note)
    }

    /// Requires `value <= bound + slack`.
    pub fn check_at_most(&mut self, name: &str, value: f64, bound: f64, slack: f64, note: &str) -> bool {
        self.push(name, value, Comparison::AtMost, bound, slack, note)
    }

    /// Requires `value >= bound − slack`.
    pub fn check_at_least(&mut self, name: &str, value: f64, bound: f64, slack: f64, note: &str) -> bool {
        self.push(name, value, Comparison::AtLeast, bound, slack, note)
    }

    /// Records a file already written into the output directory.
    pub fn artifact(&mut self, name: String) {
        self.artifacts.push(name);
    }

    /// The metric row with the given name, if any.
    pub fn metric(&self, name: &str) -> Option<&MetricRow> {
        self.metrics.iter().find(|m| m.name == name)
    }

    /// Writes `report.json` (pretty-printed, trailing newline) into `dir`
    /// and returns its path.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let path = dir.join("report.json");
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        fs::write(&path, text)?;
        Ok(path)
    }

    /// One line per metric plus a final verdict, for terminal display.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for m in &self.metrics {
            let rel = match m.comparison {
                Comparison::Within => format!("within {} ± {}", m.target, m.tolerance),
                Comparison::AtMost => format!("at most {}", m.target),
                Comparison::AtLeast => format!("at least {}", m.target),
            };
            let verdict = if m.pass { "PASS" } else { "FAIL" };
            out.push_str(&format!("[{verdict}] {} = {} ({rel})\n", m.name, m.value));
        }
        out.push_str(&format!(
            "{}: {}\n",
            self.experiment,
            if self.pass { "all metrics pass" } else { "METRIC FAILURE" }
        ));
        out
    }
}

/// Writes a text artifact into `dir` (creating it if needed) and returns the
/// bare file name for the report's artifact list.
pub fn save_artifact(dir: &Path, name: &str, contents: &str) -> Result<String> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), contents)?;
    Ok(name.to_string())
}
