//! Result rows, the CSV/JSON writers and the post-run self-audit.

use std::io::Write;

use serde::Serialize;

use super::config::ScenarioConfig;
use crate::error::Result;
use crate::pipeline::{ExponentialFit, FitResult};

/// Bumped whenever the CSV columns change.
pub const SCHEMA_VERSION: u32 = 1;

pub const CSV_HEADER: &str = "scenario,series,variable,value,quantity,estimate,error,oracle,exact_qfi,coherence,witnessed_depth,n_unitaries,seed";

/// One estimate next to its exact value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub scenario: String,
    /// Sub-population within a scenario, e.g. `gamma_per_t=0.01`.
    pub series: String,
    /// Name of the swept variable, with units.
    pub variable: String,
    pub value: f64,
    pub quantity: String,
    pub estimate: f64,
    pub error: f64,
    pub oracle: f64,
    pub exact_qfi: Option<f64>,
    pub coherence: Option<f64>,
    pub witnessed_depth: Option<usize>,
    pub n_unitaries: usize,
    pub seed: u64,
}

/// Shortest round-trip decimal, switching to exponent form for very large or
/// small magnitudes.
pub fn format_float(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

impl ResultRow {
    pub fn csv_line(&self) -> String {
        let opt = |v: Option<f64>| v.map(format_float).unwrap_or_default();
        [
            self.scenario.clone(),
            self.series.clone(),
            self.variable.clone(),
            format_float(self.value),
            self.quantity.clone(),
            format_float(self.estimate),
            format_float(self.error),
            format_float(self.oracle),
            opt(self.exact_qfi),
            opt(self.coherence),
            self.witnessed_depth.map(|d| d.to_string()).unwrap_or_default(),
            self.n_unitaries.to_string(),
            self.seed.to_string(),
        ]
        .join(",")
    }
}

pub fn write_csv<W: Write>(mut out: W, rows: &[ResultRow]) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(out, "{}", r.csv_line())?;
    }
    out.flush()?;
    Ok(())
}

/// Share of rows with `|estimate − oracle| ≤ 5·error`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Audit {
    pub rows: usize,
    pub within: usize,
    pub fraction: f64,
    pub sigma_multiple: f64,
    pub required_fraction: f64,
    /// False in shot mode, where the estimators are biased by design.
    pub applicable: bool,
    pub passed: bool,
}

pub fn audit(rows: &[ResultRow], applicable: bool) -> Audit {
    const K: f64 = 5.0;
    const REQUIRED: f64 = 0.99;
    // Absolute slack for rows whose estimate and error are both exactly zero.
    const SLACK: f64 = 1e-9;
    let within = rows
        .iter()
        .filter(|r| (r.estimate - r.oracle).abs() <= K * r.error + SLACK)
        .count();
    let fraction = if rows.is_empty() { 1.0 } else { within as f64 / rows.len() as f64 };
    Audit {
        rows: rows.len(),
        within,
        fraction,
        sigma_multiple: K,
        required_fraction: REQUIRED,
        applicable,
        passed: !applicable || fraction >= REQUIRED,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabeledFit {
    pub series: String,
    pub variable: String,
    pub value: f64,
    pub fit: FitResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabeledExponentialFit {
    pub series: String,
    /// Qubit counts that reached the threshold and entered the fit.
    pub points: Vec<(usize, usize)>,
    pub fit: Option<ExponentialFit>,
}

/// Everything a scenario run produces.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunOutput {
    pub config: ScenarioConfig,
    pub rows: Vec<ResultRow>,
    pub fits: Vec<LabeledFit>,
    pub exponential_fits: Vec<LabeledExponentialFit>,
    pub notes: Vec<String>,
}

impl RunOutput {
    pub fn audit(&self) -> Audit {
        let exact_mode = match &self.config.params {
            super::config::ScenarioParams::RamseyTime { sweep, .. }
            | super::config::ScenarioParams::RamseyPhi { sweep, .. }
            | super::config::ScenarioParams::Ghz { sweep, .. } => sweep.shots.is_none(),
            _ => true,
        };
        audit(&self.rows, exact_mode)
    }
}

#[derive(Serialize)]
struct Summary<'a> {
    schema_version: u32,
    software_version: &'static str,
    scenario: &'static str,
    error_definition: String,
    config: &'a ScenarioConfig,
    fits: &'a [LabeledFit],
    exponential_fits: &'a [LabeledExponentialFit],
    audit: Audit,
    notes: &'a [String],
    #[serde(skip_serializing_if = "Option::is_none")]
    rows: Option<&'a [ResultRow]>,
}

impl RunOutput {
    fn summary(&self, with_rows: bool) -> Summary<'_> {
        Summary {
            schema_version: SCHEMA_VERSION,
            software_version: env!("CARGO_PKG_VERSION"),
            scenario: self.config.scenario.name(),
            error_definition: "standard deviation over a nonparametric bootstrap of the random unitaries; \
                               scaling rows use the standard error over repetitions"
                .into(),
            config: &self.config,
            fits: &self.fits,
            exponential_fits: &self.exponential_fits,
            audit: self.audit(),
            notes: &self.notes,
            rows: with_rows.then_some(self.rows.as_slice()),
        }
    }

    /// Companion summary for the CSV output: fits, audit, resolved config.
    pub fn summary_json(&self) -> String {
        serde_json::to_string_pretty(&self.summary(false)).expect("summary serializes")
    }

    /// Summary plus every row, for `--format json`.
    pub fn full_json(&self) -> String {
        serde_json::to_string_pretty(&self.summary(true)).expect("summary serializes")
    }

    pub fn csv(&self) -> String {
        let mut buf = Vec::new();
        write_csv(&mut buf, &self.rows).expect("writing to memory");
        String::from_utf8(buf).expect("ascii")
    }
}
