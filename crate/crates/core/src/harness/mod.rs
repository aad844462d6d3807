//! Experiment planner and runner.
//!
//! A suite drives one structure or algorithm through seeded trials, compares
//! the observed statistics against their closed-form predictions, and emits
//! a machine-readable report. Trials draw randomness from child sources
//! forked as (seed, trial id), so a report is a pure function of
//! (suite, parameters, seed) and reruns are byte-identical.

mod predict;
mod report;
mod suites;

pub use predict::{predict, PredictParams};
pub use report::{emit, Format};
pub use suites::{available_suites, suite_description};

use crate::bounds::BoundsError;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("unknown metric {0:?}")]
    UnknownMetric(String),
    #[error("unknown suite {0:?}; available: {1}")]
    UnknownSuite(String, String),
    #[error("metric {metric:?} is missing parameter {param}")]
    MissingParam {
        metric: &'static str,
        param: &'static str,
    },
    #[error("invalid parameter {0}: {1}")]
    InvalidParam(&'static str, String),
    #[error("trial {trial} failed: {message}")]
    TrialFailed { trial: u64, message: String },
    #[error("bounds error: {0}")]
    Bounds(#[from] BoundsError),
}

/// Knobs shared by the suites; a suite reads what it needs and falls back
/// to its documented defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SuiteParams {
    pub n: Option<u64>,
    pub p: Option<f64>,
    pub eps: Option<f64>,
    pub delta: Option<f64>,
    pub phi: Option<f64>,
    pub trials: Option<u64>,
}

/// A named experiment at a seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub suite: String,
    pub params: SuiteParams,
    pub seed: u64,
}

/// One checked statistic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub name: String,
    pub observed: f64,
    pub predicted: f64,
    pub tolerance: f64,
    /// Which rule produced the tolerance: a three-standard-error band, a
    /// sampling-lemma plan, a one-sided bound, or an exact identity.
    pub tolerance_source: String,
    pub pass: bool,
}

impl MetricReport {
    /// Two-sided band: |observed - predicted| <= tolerance.
    pub fn band(
        name: &str,
        observed: f64,
        predicted: f64,
        tolerance: f64,
        source: &str,
    ) -> MetricReport {
        MetricReport {
            name: name.to_string(),
            observed,
            predicted,
            tolerance,
            tolerance_source: source.to_string(),
            pass: (observed - predicted).abs() <= tolerance,
        }
    }

    /// One-sided ceiling: observed <= predicted.
    pub fn at_most(name: &str, observed: f64, predicted: f64) -> MetricReport {
        MetricReport {
            name: name.to_string(),
            observed,
            predicted,
            tolerance: 0.0,
            tolerance_source: "one_sided".to_string(),
            pass: observed <= predicted,
        }
    }

    /// One-sided floor: observed >= predicted.
    pub fn at_least(name: &str, observed: f64, predicted: f64) -> MetricReport {
        MetricReport {
            name: name.to_string(),
            observed,
            predicted,
            tolerance: 0.0,
            tolerance_source: "one_sided".to_string(),
            pass: observed >= predicted,
        }
    }
}

/// Full per-run record. `runtime_ms` is filled only on request so that
/// default reports are byte-identical across reruns of the same spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub version: u32,
    pub suite: String,
    pub seed: u64,
    pub trials: u64,
    pub metrics: Vec<MetricReport>,
    pub bits_consumed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<u64>,
}

impl ExperimentReport {
    pub fn all_pass(&self) -> bool {
        self.metrics.iter().all(|m| m.pass)
    }
}

/// Run a suite; the report depends only on (suite, params, seed).
pub fn run(spec: &ExperimentSpec) -> Result<ExperimentReport, HarnessError> {
    suites::run_suite(spec)
}

/// Run a suite and record wall-clock time in the report.
pub fn run_timed(spec: &ExperimentSpec) -> Result<ExperimentReport, HarnessError> {
    let start = std::time::Instant::now();
    let mut report = run(spec)?;
    report.runtime_ms = Some(start.elapsed().as_millis() as u64);
    Ok(report)
}
