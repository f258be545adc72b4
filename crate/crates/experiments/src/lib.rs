//! Experiment harness behind the `htt` command-line tool.
//!
//! Each subcommand reads a flat `key = value` config (see [`config`]), runs
//! its experiment, writes CSV/SVG artifacts under the output directory and a
//! JSON [`report::Report`] with one record per check.

pub mod config;
pub mod error;
pub mod plot;
pub mod report;
pub mod runs;
pub mod thresholds;

use std::path::PathBuf;

pub use config::ExperimentConfig;
pub use error::{HarnessError, Result};
pub use report::Report;

/// The experiments the CLI can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Esd,
    Ladder,
    Limit,
    Properties,
    Equidist,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Esd => "esd",
            Experiment::Ladder => "ladder",
            Experiment::Limit => "limit",
            Experiment::Properties => "properties",
            Experiment::Equidist => "equidist",
        }
    }

    pub fn run(self, cfg: &ExperimentConfig) -> Result<Report> {
        match self {
            Experiment::Esd => runs::esd::run_esd(cfg),
            Experiment::Ladder => runs::ladder::run_truncation_ladder(cfg),
            Experiment::Limit => runs::limit::run_limit_convergence(cfg),
            Experiment::Properties => runs::properties::run_property_suite(cfg),
            Experiment::Equidist => runs::equidist::run_equidistribution(cfg),
        }
    }
}

/// Runs `experiment` and saves its report as `<out>/<name>_report.json`.
pub fn run_and_save(experiment: Experiment, cfg: &ExperimentConfig) -> Result<(Report, PathBuf)> {
    runs::prepare_dir(&cfg.out)?;
    let report = experiment.run(cfg)?;
    let path = cfg.out.join(format!("{}_report.json", experiment.name()));
    report.save(&path)?;
    Ok((report, path))
}
