//! Measurement records and their line-delimited JSON file format.
//!
//! One record per line, fields in this order:
//! `unitary_index`, `ensemble`, `num_qubits`, `params`, `shots`,
//! `probabilities_a`, `probabilities_b`. `shots` and `probabilities_b` may be
//! `null`. Blank lines are ignored.

use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ensemble::{Ensemble, EnsembleKind, EnsembleSpec};
use super::measure::{sample_frequencies, MeasurementEngine};
use super::rng::{domain, SeedStream};
use crate::error::{Error, Result};
use crate::state::DensityMatrix;
use crate::tolerance;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementRecord {
    pub unitary_index: u64,
    pub ensemble: EnsembleKind,
    pub num_qubits: usize,
    /// Parameters of the drawn unitary (angles or disorder fields).
    pub params: Vec<f64>,
    /// Shot count when the probabilities are empirical frequencies.
    pub shots: Option<u64>,
    pub probabilities_a: Vec<f64>,
    pub probabilities_b: Option<Vec<f64>>,
}

impl MeasurementRecord {
    pub fn validate(&self) -> Result<()> {
        if self.num_qubits == 0 || self.num_qubits > tolerance::MAX_QUBITS {
            return Err(Error::InvalidParameter(format!(
                "record {}: unsupported qubit count {}",
                self.unitary_index, self.num_qubits
            )));
        }
        if self.shots == Some(0) {
            return Err(Error::InvalidParameter(format!(
                "record {}: shots must be positive",
                self.unitary_index
            )));
        }
        let tol = if self.shots.is_some() { 1e-12 } else { tolerance::PROBABILITY_SUM };
        let dim = 1usize << self.num_qubits;
        let check = |p: &[f64], label: &str| -> Result<()> {
            if p.len() != dim {
                return Err(Error::InvalidParameter(format!(
                    "record {}: {label} has {} entries, expected {dim}",
                    self.unitary_index,
                    p.len()
                )));
            }
            if p.iter().any(|x| !(*x >= 0.0)) {
                return Err(Error::InvalidParameter(format!(
                    "record {}: {label} has a negative or non-finite entry",
                    self.unitary_index
                )));
            }
            let sum: f64 = p.iter().sum();
            if (sum - 1.0).abs() > tol {
                return Err(Error::InvalidParameter(format!(
                    "record {}: {label} sums to {sum}",
                    self.unitary_index
                )));
            }
            Ok(())
        };
        check(&self.probabilities_a, "probabilities_a")?;
        if let Some(b) = &self.probabilities_b {
            check(b, "probabilities_b")?;
        }
        Ok(())
    }
}

pub fn write_records<W: Write>(mut out: W, records: &[MeasurementRecord]) -> Result<()> {
    for r in records {
        let line = serde_json::to_string(r).map_err(|e| Error::Io(e.into()))?;
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

/// Parses and validates a record file. Errors carry 1-based line numbers.
pub fn read_records<R: BufRead>(input: R) -> Result<Vec<MeasurementRecord>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: MeasurementRecord = serde_json::from_str(&line).map_err(|e| Error::RecordFormat {
            line: i + 1,
            message: e.to_string(),
        })?;
        rec.validate().map_err(|e| Error::RecordFormat {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(rec);
    }
    Ok(out)
}

/// Simulates `n` records: draw `i` is applied to both states.
pub fn generate_records(
    spec: &EnsembleSpec,
    seed: SeedStream,
    state_a: &DensityMatrix,
    state_b: Option<&DensityMatrix>,
    n: usize,
    shots: Option<u64>,
) -> Result<Vec<MeasurementRecord>> {
    let ensemble = Ensemble::new(spec.clone(), seed)?;
    let mut states = vec![state_a.clone()];
    states.extend(state_b.cloned());
    let engine = MeasurementEngine::new(&states)?;
    let shot_seeds = seed.derive(domain::SHOTS);
    (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let draw = ensemble.draw(i);
            let mut probs = engine.probabilities(&ensemble, &draw)?;
            if let Some(s) = shots {
                let mut rng = shot_seeds.rng(i);
                for p in probs.iter_mut() {
                    *p = sample_frequencies(p, s, &mut rng)?;
                }
            }
            let mut it = probs.into_iter();
            Ok(MeasurementRecord {
                unitary_index: i,
                ensemble: spec.kind,
                num_qubits: spec.num_qubits,
                params: draw.params(),
                shots,
                probabilities_a: it.next().expect("state a"),
                probabilities_b: it.next(),
            })
        })
        .collect()
}
