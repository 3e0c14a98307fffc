//! Banded numerical checks of the kernel estimates, collected as reports.
//!
//! Every check records its full parameter grid. Checks are deterministic
//! given a [`VerifyConfig`]; failures of the numerics are recorded in the
//! report instead of aborting the suite.

mod checks;

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::special::QuadratureSpec;

/// All check identifiers, in suite order.
pub const CHECK_IDS: [&str; 19] = [
    "q1-oracle",
    "stochasticity",
    "semigroup-law",
    "initial-data",
    "A1-band",
    "phi0-band",
    "eta-domination",
    "prop-est-a",
    "prop-est-b",
    "prop-est-c",
    "prop-est-d",
    "T-half-equals-P-one",
    "heat-domination",
    "Z-profile",
    "prop2-band",
    "flow-conjugation",
    "weights-roundtrip",
    "pde-residual",
    "subordination-closed-form",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerifyConfig {
    /// Restricts the q grid of checks defined for this q.
    pub q: Option<u32>,
    pub spec: QuadratureSpec,
    /// Largest admissible `max/min` of a two-sided band.
    pub band_limit: f64,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { q: None, spec: QuadratureSpec::default(), band_limit: 100.0, seed: 20240607 }
    }
}

impl VerifyConfig {
    /// The default grid, narrowed to `self.q` when it belongs to it.
    pub(crate) fn qs(&self, default: &[u32]) -> Vec<u32> {
        match self.q {
            Some(q) if default.contains(&q) => vec![q],
            _ => default.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Measured {
    Band { min_ratio: f64, max_ratio: f64 },
    Residual { max_abs_residual: f64 },
    Order { min_order: f64 },
}

impl Measured {
    pub(crate) fn band(values: impl IntoIterator<Item = f64>) -> Measured {
        let (lo, hi) = values
            .into_iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        Measured::Band { min_ratio: lo, max_ratio: hi }
    }

    /// `max/min` of a band.
    pub fn spread(&self) -> Option<f64> {
        match *self {
            Measured::Band { min_ratio, max_ratio } => Some(max_ratio / min_ratio),
            _ => None,
        }
    }
}

/// One labelled sub-result, e.g. the band of one parameter pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Detail {
    pub label: String,
    pub measured: Measured,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub check_id: String,
    pub parameter_grid: Value,
    pub measured: Measured,
    pub threshold: f64,
    pub passed: bool,
    pub details: Vec<Detail>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Wall time; not serialised so that reports are reproducible bit for bit.
    #[serde(skip)]
    pub runtime_ms: u64,
}

impl VerificationReport {
    /// CSV of the details: `label,kind,a,b,passed`.
    pub fn details_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(["label", "kind", "a", "b", "passed"])?;
        for d in &self.details {
            let (kind, a, b) = match d.measured {
                Measured::Band { min_ratio, max_ratio } => ("band", min_ratio, max_ratio),
                Measured::Residual { max_abs_residual } => ("residual", max_abs_residual, f64::NAN),
                Measured::Order { min_order } => ("order", min_order, f64::NAN),
            };
            w.write_record([
                d.label.clone(),
                kind.to_string(),
                format!("{a:.16e}"),
                format!("{b:.16e}"),
                d.passed.to_string(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("ascii"))
    }
}

/// What a check function hands back before timing and error capture.
pub(crate) struct Outcome {
    pub measured: Measured,
    pub threshold: f64,
    pub passed: bool,
    pub details: Vec<Detail>,
}

/// Runs one check. Unknown ids are a domain error; numerical failures inside
/// the check produce a failed report.
pub fn run_check(check_id: &str, config: &VerifyConfig) -> Result<VerificationReport> {
    config.spec.validate()?;
    let (grid, body) = checks::lookup(check_id, config)
        .ok_or_else(|| Error::domain(format!("unknown check `{check_id}`; known: {}", CHECK_IDS.join(", "))))?;
    let start = Instant::now();
    let result = body();
    let runtime_ms = start.elapsed().as_millis() as u64;
    Ok(match result {
        Ok(o) => VerificationReport {
            check_id: check_id.to_string(),
            parameter_grid: grid,
            measured: o.measured,
            threshold: o.threshold,
            passed: o.passed,
            details: o.details,
            error: None,
            runtime_ms,
        },
        Err(e) => VerificationReport {
            check_id: check_id.to_string(),
            parameter_grid: grid,
            measured: Measured::Residual { max_abs_residual: f64::NAN },
            threshold: f64::NAN,
            passed: false,
            details: Vec::new(),
            error: Some(e.to_string()),
            runtime_ms,
        },
    })
}

/// Every check, run in parallel, reported in [`CHECK_IDS`] order.
pub fn run_suite(config: &VerifyConfig) -> Result<Vec<VerificationReport>> {
    CHECK_IDS.par_iter().map(|id| run_check(id, config)).collect()
}
