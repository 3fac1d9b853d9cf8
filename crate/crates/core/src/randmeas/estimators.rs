//! Trace-functional estimators from randomized-measurement records.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ensemble::EnsembleKind;
use super::record::MeasurementRecord;
use super::rng::{domain, SeedStream};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub n_unitaries: usize,
    pub method: String,
}

/// Bilinear form turning two outcome distributions measured after the same
/// random unitary into an unbiased term for `Tr ρ_A ρ_B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    /// Local Haar: `2^N Σ_{s,s'} (−2)^{−h(s,s')} P_A(s) P_B(s')`.
    Hamming { num_qubits: usize },
    /// Unitary 2-design on the full space: `(D+1) Σ_s P_A(s) P_B(s) − 1`.
    Global { num_qubits: usize },
}

impl Kernel {
    pub fn for_ensemble(kind: EnsembleKind, num_qubits: usize) -> Self {
        match kind {
            EnsembleKind::HaarSingleQubitEuler | EnsembleKind::HaarLocalProduct => {
                Self::Hamming { num_qubits }
            }
            EnsembleKind::HamiltonianEvolution => Self::Global { num_qubits },
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Hamming { num_qubits } | Self::Global { num_qubits } => 1 << num_qubits,
        }
    }

    pub fn evaluate(&self, pa: &[f64], pb: &[f64]) -> f64 {
        debug_assert_eq!(pa.len(), self.dim());
        debug_assert_eq!(pb.len(), self.dim());
        match *self {
            Self::Hamming { num_qubits } => {
                // Apply ⊗_q [[2, −1], [−1, 2]] to pb, then dot with pa.
                let mut y = pb.to_vec();
                for q in 0..num_qubits {
                    let stride = 1usize << q;
                    for base in (0..y.len()).step_by(2 * stride) {
                        for lo in base..base + stride {
                            let (a, b) = (y[lo], y[lo + stride]);
                            y[lo] = 2.0 * a - b;
                            y[lo + stride] = 2.0 * b - a;
                        }
                    }
                }
                pa.iter().zip(&y).map(|(a, b)| a * b).sum()
            }
            Self::Global { num_qubits } => {
                let d = (1usize << num_qubits) as f64;
                (d + 1.0) * pa.iter().zip(pb).map(|(a, b)| a * b).sum::<f64>() - 1.0
            }
        }
    }
}

/// Per-unitary terms for one pair of states.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PairTerms {
    pub cross: f64,
    pub purity_a: f64,
    pub purity_b: f64,
}

impl PairTerms {
    pub fn from_probabilities(kernel: &Kernel, pa: &[f64], pb: &[f64]) -> Self {
        Self {
            cross: kernel.evaluate(pa, pb),
            purity_a: kernel.evaluate(pa, pa),
            purity_b: kernel.evaluate(pb, pb),
        }
    }

    pub fn mean(terms: impl ExactSizeIterator<Item = Self>) -> Self {
        let n = terms.len() as f64;
        let mut acc = Self::default();
        for t in terms {
            acc.cross += t.cross;
            acc.purity_a += t.purity_a;
            acc.purity_b += t.purity_b;
        }
        Self {
            cross: acc.cross / n,
            purity_a: acc.purity_a / n,
            purity_b: acc.purity_b / n,
        }
    }
}

/// How the mixedness term `√((1−P_A)(1−P_B))` treats estimated purities that
/// overshoot 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixednessRule {
    /// `sign·√|x_A x_B|` when both `x = 1 − P̂` share a sign, else 0. For
    /// pure states the fluctuations of the overlap and purity estimates then
    /// cancel to first order.
    #[default]
    Signed,
    /// `√(max(0, x_A)·max(0, x_B))`.
    Truncated,
}

impl MixednessRule {
    pub fn term(&self, purity_a: f64, purity_b: f64) -> f64 {
        let (xa, xb) = (1.0 - purity_a, 1.0 - purity_b);
        match self {
            Self::Truncated => (xa.max(0.0) * xb.max(0.0)).sqrt(),
            Self::Signed => {
                if xa >= 0.0 && xb >= 0.0 {
                    (xa * xb).sqrt()
                } else if xa <= 0.0 && xb <= 0.0 {
                    -(xa * xb).sqrt()
                } else {
                    0.0
                }
            }
        }
    }

    /// Superfidelity estimate from averaged terms; not clamped so that the
    /// estimator stays centered near `g = 1`.
    pub fn superfidelity(&self, t: &PairTerms) -> f64 {
        t.cross + self.term(t.purity_a, t.purity_b)
    }
}

/// `8(1 − √ĝ)` without the upper clamp, so values slightly below zero are
/// possible when `ĝ > 1`.
pub fn bures_estimate(g: f64) -> f64 {
    8.0 * (1.0 - g.max(0.0).sqrt())
}

/// Nonparametric bootstrap over unitaries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bootstrap {
    pub resamples: usize,
    pub seeds: SeedStream,
}

impl Bootstrap {
    pub const DEFAULT_RESAMPLES: usize = 500;

    pub fn new(resamples: usize, seed: SeedStream) -> Self {
        Self {
            resamples,
            seeds: seed.derive(domain::BOOTSTRAP),
        }
    }

    /// Resample `r` of `n` items.
    pub fn indices(&self, r: usize, n: usize) -> Vec<usize> {
        use rand::Rng;
        let mut rng = self.seeds.rng(r as u64);
        (0..n).map(|_| rng.random_range(0..n)).collect()
    }

    /// Statistic evaluated on every resample, in resample order.
    pub fn replicates<T, F>(&self, n: usize, stat: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&[usize]) -> T + Sync,
    {
        (0..self.resamples)
            .into_par_iter()
            .map(|r| stat(&self.indices(r, n)))
            .collect()
    }
}

/// Sample mean and standard error of the mean.
pub fn mean_and_error(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Sample standard deviation.
pub fn std_dev(xs: &[f64]) -> f64 {
    mean_and_error(xs).1 * (xs.len() as f64).sqrt()
}

fn check_records(records: &[MeasurementRecord], num_qubits: usize, need_b: bool) -> Result<Kernel> {
    let first = records
        .first()
        .ok_or_else(|| Error::Estimator("no records".into()))?;
    let kind = first.ensemble;
    for r in records {
        if r.ensemble != kind {
            return Err(Error::Estimator(format!(
                "records mix ensembles {} and {}",
                kind.name(),
                r.ensemble.name()
            )));
        }
        if r.num_qubits != num_qubits {
            return Err(Error::Estimator(format!(
                "record {} has {} qubits, expected {num_qubits}",
                r.unitary_index, r.num_qubits
            )));
        }
        if need_b && r.probabilities_b.is_none() {
            return Err(Error::Estimator(format!(
                "record {} lacks the second state",
                r.unitary_index
            )));
        }
        r.validate()?;
    }
    if kind == EnsembleKind::HaarSingleQubitEuler && num_qubits != 1 {
        return Err(Error::Estimator("Euler records must be single-qubit".into()));
    }
    Ok(Kernel::for_ensemble(kind, num_qubits))
}

fn estimate_from_terms(terms: Vec<f64>, method: &str) -> Estimate {
    let (value, std_error) = mean_and_error(&terms);
    Estimate {
        value,
        std_error,
        n_unitaries: terms.len(),
        method: method.into(),
    }
}

/// `6⟨p_A p_B⟩ − 1` with `p` the outcome-0 probability of a single qubit.
pub fn estimate_fidelity_single_qubit(records: &[MeasurementRecord]) -> Result<Estimate> {
    check_records(records, 1, true)?;
    let terms = records
        .iter()
        .map(|r| 6.0 * r.probabilities_a[0] * r.probabilities_b.as_ref().expect("checked")[0] - 1.0)
        .collect();
    Ok(estimate_from_terms(terms, "single-qubit 6<pApB>-1"))
}

/// Unbiased estimate of `Tr ρ_A ρ_B`.
pub fn estimate_overlap(records: &[MeasurementRecord], num_qubits: usize) -> Result<Estimate> {
    let kernel = check_records(records, num_qubits, true)?;
    let terms = records
        .iter()
        .map(|r| kernel.evaluate(&r.probabilities_a, r.probabilities_b.as_ref().expect("checked")))
        .collect();
    Ok(estimate_from_terms(terms, kernel_label(&kernel)))
}

/// Unbiased estimate of `Tr ρ_A²` (exact-probability records).
pub fn estimate_purity(records: &[MeasurementRecord], num_qubits: usize) -> Result<Estimate> {
    let kernel = check_records(records, num_qubits, false)?;
    let terms = records
        .iter()
        .map(|r| kernel.evaluate(&r.probabilities_a, &r.probabilities_a))
        .collect();
    Ok(estimate_from_terms(terms, kernel_label(&kernel)))
}

fn kernel_label(k: &Kernel) -> &'static str {
    match k {
        Kernel::Hamming { .. } => "local Hamming kernel",
        Kernel::Global { .. } => "global 2-design kernel",
    }
}

pub fn record_terms(records: &[MeasurementRecord], num_qubits: usize) -> Result<Vec<PairTerms>> {
    let kernel = check_records(records, num_qubits, true)?;
    Ok(records
        .iter()
        .map(|r| {
            PairTerms::from_probabilities(&kernel, &r.probabilities_a, r.probabilities_b.as_ref().expect("checked"))
        })
        .collect())
}

/// Superfidelity estimate with the default mixedness rule and a
/// 500-resample bootstrap error seeded from 0.
pub fn estimate_superfidelity(records: &[MeasurementRecord], num_qubits: usize) -> Result<Estimate> {
    estimate_superfidelity_with(
        records,
        num_qubits,
        MixednessRule::default(),
        &Bootstrap::new(Bootstrap::DEFAULT_RESAMPLES, SeedStream::new(0)),
    )
}

pub fn estimate_superfidelity_with(
    records: &[MeasurementRecord],
    num_qubits: usize,
    rule: MixednessRule,
    bootstrap: &Bootstrap,
) -> Result<Estimate> {
    let terms = record_terms(records, num_qubits)?;
    let value = rule.superfidelity(&PairTerms::mean(terms.iter().copied()));
    let reps = bootstrap.replicates(terms.len(), |idx| {
        rule.superfidelity(&PairTerms::mean(idx.iter().map(|&i| terms[i])))
    });
    Ok(Estimate {
        value,
        std_error: std_dev(&reps),
        n_unitaries: terms.len(),
        method: format!("superfidelity, bootstrap over unitaries ({} resamples)", bootstrap.resamples),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{dephase, ramsey_state_with_phase, DephasingParams};
    use crate::metrics::superfidelity;
    use crate::random::random_density;
    use crate::randmeas::ensemble::EnsembleSpec;
    use crate::randmeas::record::generate_records;
    use crate::state::{overlap, purity, DensityMatrix};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_2;

    fn within(e: &Estimate, target: f64, k: f64) {
        assert!(
            (e.value - target).abs() <= k * e.std_error + 1e-12,
            "{} ± {} vs {target}",
            e.value,
            e.std_error
        );
    }

    fn records(n_q: usize, a: &DensityMatrix, b: &DensityMatrix, n: usize, seed: u64) -> Vec<MeasurementRecord> {
        let spec = if n_q == 1 {
            EnsembleSpec::single_qubit_euler()
        } else {
            EnsembleSpec::local_haar(n_q)
        };
        generate_records(&spec, SeedStream::new(seed), a, Some(b), n, None).unwrap()
    }

    #[test]
    fn hamming_kernel_closed_forms() {
        let k = Kernel::Hamming { num_qubits: 1 };
        assert!((k.evaluate(&[0.5, 0.5], &[0.5, 0.5]) - 0.5).abs() < 1e-15);
        assert!((k.evaluate(&[1.0, 0.0], &[1.0, 0.0]) - 2.0).abs() < 1e-15);
        assert!((k.evaluate(&[1.0, 0.0], &[0.0, 1.0]) + 1.0).abs() < 1e-15);
        // N=2 explicit double sum
        let pa = [0.1, 0.2, 0.3, 0.4];
        let pb = [0.4, 0.1, 0.25, 0.25];
        let mut direct = 0.0;
        for s in 0..4usize {
            for t in 0..4usize {
                let h = (s ^ t).count_ones() as i32;
                direct += 4.0 * (-2.0f64).powi(-h) * pa[s] * pb[t];
            }
        }
        let k2 = Kernel::Hamming { num_qubits: 2 };
        assert!((k2.evaluate(&pa, &pb) - direct).abs() < 1e-14);
    }

    #[test]
    fn fidelity_single_qubit_cases() {
        let mixed = DensityMatrix::maximally_mixed(1);
        let e = estimate_fidelity_single_qubit(&records(1, &mixed, &mixed, 50, 1)).unwrap();
        assert!((e.value - 0.5).abs() < 1e-12 && e.std_error < 1e-12);
        let pure = DensityMatrix::basis(1, 0).unwrap();
        within(&estimate_fidelity_single_qubit(&records(1, &pure, &pure, 400, 2)).unwrap(), 1.0, 3.0);
        let other = DensityMatrix::basis(1, 1).unwrap();
        within(&estimate_fidelity_single_qubit(&records(1, &pure, &other, 400, 3)).unwrap(), 0.0, 3.0);
    }

    #[test]
    fn overlap_and_purity_cases() {
        let mixed = DensityMatrix::maximally_mixed(1);
        let e = estimate_overlap(&records(1, &mixed, &mixed, 10, 1), 1).unwrap();
        assert!((e.value - 0.5).abs() < 1e-12);
        let zero = DensityMatrix::basis(2, 0).unwrap();
        within(&estimate_overlap(&records(2, &zero, &zero, 1000, 4), 2).unwrap(), 1.0, 3.0);
        let three = DensityMatrix::basis(2, 3).unwrap();
        within(&estimate_overlap(&records(2, &zero, &three, 1000, 5), 2).unwrap(), 0.0, 3.0);
        let m2 = DensityMatrix::maximally_mixed(2);
        within(&estimate_purity(&records(2, &m2, &m2, 1000, 6), 2).unwrap(), 0.25, 3.0);
        let prod = DensityMatrix::basis(3, 5).unwrap();
        within(&estimate_purity(&records(3, &prod, &prod, 1000, 7), 3).unwrap(), 1.0, 3.0);
        let deph = dephase(
            &ramsey_state_with_phase(FRAC_PI_2, 0.0, 1.0),
            &DephasingParams { gamma: 0.5, t: 1.0 },
        )
        .unwrap();
        let target = 0.5 * (1.0 + (-2.0f64).exp());
        assert!((purity(&deph) - target).abs() < 1e-12);
        within(&estimate_purity(&records(1, &deph, &deph, 1000, 8), 1).unwrap(), target, 3.0);
    }

    #[test]
    fn unbiased_on_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for n_q in 1..=3 {
            for trial in 0..3 {
                let a = random_density(n_q, 1 + trial, &mut rng);
                let b = random_density(n_q, 2, &mut rng);
                let recs = records(n_q, &a, &b, 2000, 100 + trial as u64);
                within(&estimate_overlap(&recs, n_q).unwrap(), overlap(&a, &b).unwrap(), 4.0);
                within(&estimate_purity(&recs, n_q).unwrap(), purity(&a), 4.0);
            }
        }
    }

    #[test]
    fn superfidelity_cases() {
        let pure = DensityMatrix::basis(2, 1).unwrap();
        let e = estimate_superfidelity(&records(2, &pure, &pure, 400, 11), 2).unwrap();
        within(&e, 1.0, 3.0);
        let mixed = DensityMatrix::maximally_mixed(1);
        let e = estimate_superfidelity(&records(1, &mixed, &mixed, 100, 12), 1).unwrap();
        assert!((e.value - 1.0).abs() < 1e-12);
        let a = ramsey_state_with_phase(FRAC_PI_2, 0.0, 1.0);
        let b = ramsey_state_with_phase(FRAC_PI_2, 0.3, 1.0);
        let exact = superfidelity(&a, &b).unwrap();
        assert!((exact - 0.15f64.cos().powi(2)).abs() < 1e-12);
        let e = estimate_superfidelity(&records(1, &a, &b, 1000, 13), 1).unwrap();
        within(&e, exact, 3.0);
    }

    #[test]
    fn wrong_inputs() {
        let a = DensityMatrix::basis(2, 0).unwrap();
        let recs = generate_records(&EnsembleSpec::local_haar(2), SeedStream::new(1), &a, None, 5, None).unwrap();
        assert!(estimate_overlap(&recs, 2).is_err());
        assert!(estimate_purity(&recs, 2).is_ok());
        assert!(estimate_purity(&recs, 3).is_err());
        assert!(estimate_fidelity_single_qubit(&recs).is_err());
        assert!(estimate_overlap(&[], 2).is_err());
    }

    #[test]
    fn mixedness_rules() {
        assert_eq!(MixednessRule::Truncated.term(1.1, 1.2), 0.0);
        assert!((MixednessRule::Signed.term(1.1, 1.4) + (0.04f64).sqrt()).abs() < 1e-15);
        assert_eq!(MixednessRule::Signed.term(1.1, 0.9), 0.0);
        assert!((MixednessRule::Signed.term(0.75, 0.75) - 0.25).abs() < 1e-15);
    }
}
