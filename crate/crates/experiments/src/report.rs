//! Machine-readable run reports.

use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::thresholds::Thresholds;

/// Reference string for checks that only exercise the harness itself.
pub const PLUMBING: &str = "plumbing";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub observed: f64,
    pub threshold: f64,
    pub pass: bool,
    /// Hard checks decide the exit code; soft ones are reported only.
    pub hard: bool,
    pub reference: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub hard_failures: usize,
    pub soft_failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: u64,
    pub code_version: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub experiment: String,
    pub checks: Vec<Check>,
    pub summary: Summary,
    pub provenance: Provenance,
    pub thresholds: Thresholds,
    pub notes: Vec<String>,
    /// Measured quantities that are not checks.
    pub data: Value,
}

impl Report {
    pub fn new(config: &ExperimentConfig) -> Self {
        Self {
            experiment: config.experiment.clone(),
            checks: Vec::new(),
            summary: Summary {
                total: 0,
                passed: 0,
                hard_failures: 0,
                soft_failures: 0,
            },
            provenance: Provenance {
                config_hash: config.hash(),
                seed: config.seed,
                code_version: env!("CARGO_PKG_VERSION").to_string(),
            },
            thresholds: config.thresholds.clone(),
            notes: Vec::new(),
            data: Value::Object(Default::default()),
        }
    }

    /// Passes when `observed <= threshold`.
    pub fn at_most(&mut self, name: &str, observed: f64, threshold: f64, hard: bool, reference: &str) {
        self.push(name, observed, threshold, observed <= threshold, hard, reference);
    }

    /// Passes when `observed >= threshold`.
    pub fn at_least(&mut self, name: &str, observed: f64, threshold: f64, hard: bool, reference: &str) {
        self.push(name, observed, threshold, observed >= threshold, hard, reference);
    }

    pub fn push(
        &mut self,
        name: &str,
        observed: f64,
        threshold: f64,
        pass: bool,
        hard: bool,
        reference: &str,
    ) {
        // NaN never passes
        let pass = pass && !observed.is_nan();
        self.checks.push(Check {
            name: name.to_string(),
            observed,
            threshold,
            pass,
            hard,
            reference: reference.to_string(),
        });
        self.summary.total += 1;
        if pass {
            self.summary.passed += 1;
        } else if hard {
            self.summary.hard_failures += 1;
        } else {
            self.summary.soft_failures += 1;
        }
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn set_data(&mut self, key: &str, value: Value) {
        if let Value::Object(map) = &mut self.data {
            map.insert(key.to_string(), value);
        }
    }

    pub fn passed(&self) -> bool {
        self.summary.hard_failures == 0
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("report serializes");
        std::fs::write(path, text + "\n").map_err(|e| HarnessError::io(path, e))
    }
}
