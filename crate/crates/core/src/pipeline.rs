//! dθ sweeps of the estimated modified Bures distance, polynomial extraction
//! of the sub-QFI, the entanglement witness and measurement-budget scans.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{dephase, encode_phase, ghz_prepare, DephasingParams, IsingParams};
use crate::error::{Error, Result};
use crate::metrics::sub_qfi_exact;
use crate::randmeas::estimators::{bures_estimate, mean_and_error, std_dev, Bootstrap, Kernel, MixednessRule, PairTerms};
use crate::randmeas::measure::{sample_frequencies, MeasurementEngine};
use crate::randmeas::rng::{domain, SeedStream};
use crate::randmeas::{Ensemble, EnsembleKind, EnsembleSpec, EvolutionSpec};
use crate::state::DensityMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub mixedness: MixednessRule,
    pub bootstrap_resamples: usize,
    /// Finite-shot frequencies instead of exact probabilities.
    pub shots: Option<u64>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            mixedness: MixednessRule::Signed,
            bootstrap_resamples: Bootstrap::DEFAULT_RESAMPLES,
            shots: None,
        }
    }
}

/// Estimated `D_G(ρ_θ₀, ρ_θ₀+dθ)` over a grid of `dθ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub theta0: f64,
    pub dtheta_grid: Vec<f64>,
    pub dg_values: Vec<f64>,
    /// Bootstrap standard deviations over unitaries.
    pub dg_errors: Vec<f64>,
    pub n_unitaries: usize,
    /// Estimated purity of the reference state and its bootstrap error.
    pub reference_purity: f64,
    pub reference_purity_error: f64,
    /// Bootstrap replicates of `dg_values`, one vector per resample.
    #[serde(skip)]
    pub replicates: Vec<Vec<f64>>,
}

/// Reference state plus its shifted copies, one per grid point.
#[derive(Debug, Clone)]
pub struct SweepInput {
    pub theta0: f64,
    pub grid: Vec<f64>,
    pub reference: DensityMatrix,
    pub shifted: Vec<DensityMatrix>,
}

impl SweepInput {
    pub fn from_family<F>(family: F, theta0: f64, grid: &[f64]) -> Result<Self>
    where
        F: Fn(f64) -> Result<DensityMatrix>,
    {
        validate_grid(grid)?;
        Ok(Self {
            theta0,
            grid: grid.to_vec(),
            reference: family(theta0)?,
            shifted: grid.iter().map(|d| family(theta0 + d)).collect::<Result<_>>()?,
        })
    }
}

pub fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::param("dtheta grid is empty"));
    }
    if grid.iter().any(|d| !(*d > 0.0) || !d.is_finite()) {
        return Err(Error::param("dtheta grid values must be finite and > 0"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("dtheta grid must be strictly increasing"));
    }
    Ok(())
}

/// Per-unitary [`PairTerms`] for a list of state pairs, unitary-major.
#[derive(Debug, Clone)]
pub struct PairTermTable {
    num_pairs: usize,
    terms: Vec<PairTerms>,
}

impl PairTermTable {
    pub fn len(&self) -> usize {
        if self.num_pairs == 0 {
            0
        } else {
            self.terms.len() / self.num_pairs
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn row(&self, unitary: usize) -> &[PairTerms] {
        &self.terms[unitary * self.num_pairs..(unitary + 1) * self.num_pairs]
    }

    /// Mean terms of every pair over the given unitaries.
    pub fn mean_over<I: ExactSizeIterator<Item = usize> + Clone>(&self, idx: I) -> Vec<PairTerms> {
        (0..self.num_pairs)
            .map(|p| PairTerms::mean(idx.clone().map(|u| self.terms[u * self.num_pairs + p])))
            .collect()
    }

    fn extend(&mut self, other: PairTermTable) {
        self.terms.extend(other.terms);
    }
}

/// Simulates unitaries `range` of `ensemble` on `engine`'s states and
/// evaluates the kernel on each pair.
pub fn pair_terms(
    engine: &MeasurementEngine,
    pairs: &[(usize, usize)],
    ensemble: &Ensemble,
    range: std::ops::Range<u64>,
    shots: Option<u64>,
    seed: SeedStream,
) -> Result<PairTermTable> {
    let kernel = Kernel::for_ensemble(ensemble.spec().kind, ensemble.num_qubits());
    let shot_seeds = seed.derive(domain::SHOTS);
    let rows: Vec<Vec<PairTerms>> = range
        .into_par_iter()
        .map(|i| {
            let draw = ensemble.draw(i);
            let mut probs = engine.probabilities(ensemble, &draw)?;
            if let Some(s) = shots {
                let mut rng = shot_seeds.rng(i);
                for p in probs.iter_mut() {
                    *p = sample_frequencies(p, s, &mut rng)?;
                }
            }
            Ok(pairs
                .iter()
                .map(|&(a, b)| PairTerms::from_probabilities(&kernel, &probs[a], &probs[b]))
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(PairTermTable {
        num_pairs: pairs.len(),
        terms: rows.into_iter().flatten().collect(),
    })
}

/// Runs several sweeps on one shared set of unitaries.
pub fn sweep_dg_batch(
    inputs: &[SweepInput],
    ensemble: &EnsembleSpec,
    n: usize,
    seed: SeedStream,
    opts: &SweepOptions,
) -> Result<Vec<SweepResult>> {
    if n == 0 {
        return Err(Error::param("need at least one unitary"));
    }
    let mut states = Vec::new();
    let mut pairs = Vec::new();
    let mut offsets = Vec::new();
    for inp in inputs {
        validate_grid(&inp.grid)?;
        if inp.shifted.len() != inp.grid.len() {
            return Err(Error::DimensionMismatch {
                expected: inp.grid.len(),
                found: inp.shifted.len(),
            });
        }
        let r = states.len();
        states.push(inp.reference.clone());
        offsets.push(pairs.len());
        for s in &inp.shifted {
            pairs.push((r, states.len()));
            states.push(s.clone());
        }
    }
    let ens = Ensemble::new(ensemble.clone(), seed)?;
    let engine = MeasurementEngine::new(&states)?;
    let table = pair_terms(&engine, &pairs, &ens, 0..n as u64, opts.shots, seed)?;
    let rule = opts.mixedness;
    let to_dg = |means: &[PairTerms]| -> Vec<f64> {
        means.iter().map(|t| bures_estimate(rule.superfidelity(t))).collect()
    };
    let point_means = table.mean_over(0..n);
    let point = to_dg(&point_means);
    let boot = Bootstrap::new(opts.bootstrap_resamples, seed);
    let reps: Vec<(Vec<f64>, Vec<f64>)> = boot.replicates(n, |idx| {
        let means = table.mean_over(idx.iter().copied());
        let dg = to_dg(&means);
        let purities = offsets.iter().map(|&o| means[o].purity_a).collect();
        (dg, purities)
    });
    Ok(inputs
        .iter()
        .enumerate()
        .map(|(k, inp)| {
            let o = offsets[k];
            let g = inp.grid.len();
            let replicates: Vec<Vec<f64>> = reps.iter().map(|(d, _)| d[o..o + g].to_vec()).collect();
            let dg_errors = (0..g)
                .map(|j| std_dev(&replicates.iter().map(|r| r[j]).collect::<Vec<_>>()))
                .collect();
            let purity_reps: Vec<f64> = reps.iter().map(|(_, p)| p[k]).collect();
            SweepResult {
                theta0: inp.theta0,
                dtheta_grid: inp.grid.clone(),
                dg_values: point[o..o + g].to_vec(),
                dg_errors,
                n_unitaries: n,
                reference_purity: point_means[o].purity_a,
                reference_purity_error: std_dev(&purity_reps),
                replicates,
            }
        })
        .collect())
}

pub fn sweep_dg<F>(
    family: F,
    theta0: f64,
    grid: &[f64],
    ensemble: &EnsembleSpec,
    n: usize,
    seed: SeedStream,
    opts: &SweepOptions,
) -> Result<SweepResult>
where
    F: Fn(f64) -> Result<DensityMatrix>,
{
    let input = SweepInput::from_family(family, theta0, grid)?;
    Ok(sweep_dg_batch(&[input], ensemble, n, seed, opts)?.remove(0))
}

/// Exact `D_G` on the sweep's grid, for oracle columns.
pub fn exact_dg_curve<F>(family: F, theta0: f64, grid: &[f64]) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<DensityMatrix>,
{
    grid.iter()
        .map(|&d| Ok(sub_qfi_exact(&family, theta0, d)?.value * d * d))
        .collect()
}

/// Default grid: 8 points evenly spaced on [0.05, 0.4].
pub fn default_grid() -> Vec<f64> {
    (0..8).map(|k| 0.05 + 0.05 * k as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    /// Coefficient of dθ².
    pub sub_qfi: f64,
    /// Coefficients of dθ², dθ³, … in order.
    pub coefficients: Vec<f64>,
    pub sub_qfi_error: f64,
    pub residual_norm: f64,
    /// Standard error of `sub_qfi` from the fit covariance alone.
    pub covariance_error: f64,
    /// Spread of `sub_qfi` over bootstrap refits.
    pub bootstrap_error: f64,
    pub weighted: bool,
}

/// Least-squares fit of `Σ_{k=2}^{max_power} c_k x^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyFit {
    pub coefficients: Vec<f64>,
    pub covariance: DMatrix<f64>,
    pub residual_norm: f64,
}

pub const DEFAULT_MAX_POWER: usize = 4;

/// Weighted least squares (weights `1/σ²`) on the powers `2..=max_power`.
/// With `sigma = None` the fit is unweighted and the covariance is scaled by
/// the residual variance.
pub fn fit_powers(x: &[f64], y: &[f64], sigma: Option<&[f64]>, max_power: usize) -> Result<PolyFit> {
    if max_power < 2 {
        return Err(Error::param("fit needs max_power >= 2"));
    }
    let p = max_power - 1;
    let m = x.len();
    if y.len() != m || sigma.is_some_and(|s| s.len() != m) {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: y.len(),
        });
    }
    if m < 4.max(p) {
        return Err(Error::param(format!("fit needs at least {} points, got {m}", 4.max(p))));
    }
    let w: Vec<f64> = match sigma {
        Some(s) => s.iter().map(|v| 1.0 / v).collect(),
        None => vec![1.0; m],
    };
    let a = DMatrix::from_fn(m, p, |i, j| w[i] * x[i].powi(j as i32 + 2));
    let b = DVector::from_fn(m, |i, _| w[i] * y[i]);
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smax > 0.0) || smin / smax < 1e-12 {
        return Err(Error::RankDeficient);
    }
    let coef = svd.solve(&b, 0.0).map_err(|e| Error::NonConvergence(e.to_string()))?;
    let v_t = svd.v_t.as_ref().expect("requested");
    let inv_s2 = DMatrix::from_diagonal(&svd.singular_values.map(|s| 1.0 / (s * s)));
    let mut covariance = v_t.transpose() * inv_s2 * v_t;
    let resid: Vec<f64> = (0..m)
        .map(|i| y[i] - (0..p).map(|j| coef[j] * x[i].powi(j as i32 + 2)).sum::<f64>())
        .collect();
    if sigma.is_none() {
        let s2 = if m > p {
            resid.iter().map(|r| r * r).sum::<f64>() / (m - p) as f64
        } else {
            0.0
        };
        covariance *= s2;
    }
    Ok(PolyFit {
        coefficients: coef.iter().copied().collect(),
        covariance,
        residual_norm: resid.iter().map(|r| r * r).sum::<f64>().sqrt(),
    })
}

pub fn fit_quadratic(sweep: &SweepResult) -> Result<FitResult> {
    fit_sweep(sweep, DEFAULT_MAX_POWER)
}

/// Fits the sweep and inflates the covariance error by the spread of refits
/// on the bootstrap replicates.
pub fn fit_sweep(sweep: &SweepResult, max_power: usize) -> Result<FitResult> {
    validate_grid(&sweep.dtheta_grid)?;
    let sigma_ok = sweep.dg_errors.iter().all(|s| *s > 0.0 && s.is_finite());
    let sigma = sigma_ok.then_some(sweep.dg_errors.as_slice());
    let fit = fit_powers(&sweep.dtheta_grid, &sweep.dg_values, sigma, max_power)?;
    let covariance_error = fit.covariance[(0, 0)].max(0.0).sqrt();
    let refits: Vec<f64> = sweep
        .replicates
        .par_iter()
        .filter_map(|r| fit_powers(&sweep.dtheta_grid, r, sigma, max_power).ok())
        .map(|f| f.coefficients[0])
        .collect();
    let bootstrap_error = if refits.len() > 1 { std_dev(&refits) } else { 0.0 };
    Ok(FitResult {
        sub_qfi: fit.coefficients[0],
        coefficients: fit.coefficients,
        sub_qfi_error: covariance_error.max(bootstrap_error),
        residual_norm: fit.residual_norm,
        covariance_error,
        bootstrap_error,
        weighted: sigma.is_some(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessResult {
    pub qfi_density: f64,
    /// Largest `m` with `F/N > m`, clamped to `N − 1`.
    pub m_witnessed: usize,
    pub num_qubits: usize,
}

impl WitnessResult {
    /// Certified entanglement depth `m + 1`.
    pub fn depth(&self) -> usize {
        self.m_witnessed + 1
    }
}

pub fn witness(qfi_value: f64, num_qubits: usize) -> Result<WitnessResult> {
    if !(qfi_value >= 0.0) || !qfi_value.is_finite() {
        return Err(Error::param(format!("QFI must be finite and >= 0, got {qfi_value}")));
    }
    if num_qubits == 0 {
        return Err(Error::param("witness needs at least one qubit"));
    }
    let density = qfi_value / num_qubits as f64;
    let floor = density.floor();
    let m = if density == floor { (floor - 1.0).max(0.0) } else { floor };
    Ok(WitnessResult {
        qfi_density: density,
        m_witnessed: (m as usize).min(num_qubits - 1),
        num_qubits,
    })
}

/// Dephased GHZ probes under the disordered Ising ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ManyBodyScenario {
    /// Ensemble of measurement unitaries; only the disordered Ising
    /// evolution and local Haar are meaningful here.
    pub ensemble_kind: EnsembleKind,
    pub coupling: f64,
    pub alpha: f64,
    pub omega: f64,
    pub segments: usize,
    pub segment_duration: f64,
    pub disorder_std: f64,
    /// Dephasing rate γ.
    pub gamma: f64,
    /// Dephasing time applied to the GHZ state before encoding.
    pub time: f64,
    pub theta0: f64,
    pub dtheta: f64,
}

impl Default for ManyBodyScenario {
    /// `g = Ω = δ = 1/T` with `T = 1`, `α = 1.5`, `K = 20`, `dθ = 0.1`, no dephasing.
    fn default() -> Self {
        Self {
            ensemble_kind: EnsembleKind::HamiltonianEvolution,
            coupling: 1.0,
            alpha: 1.5,
            omega: 1.0,
            segments: 20,
            segment_duration: 1.0,
            disorder_std: 1.0,
            gamma: 0.0,
            time: 0.0,
            theta0: 0.0,
            dtheta: 0.1,
        }
    }
}

impl ManyBodyScenario {
    pub fn ensemble(&self, num_qubits: usize) -> EnsembleSpec {
        if self.ensemble_kind != EnsembleKind::HamiltonianEvolution {
            return EnsembleSpec {
                kind: self.ensemble_kind,
                num_qubits,
                evolution: None,
            };
        }
        EnsembleSpec::hamiltonian_evolution(EvolutionSpec {
            segments: self.segments,
            segment_duration: self.segment_duration,
            disorder_std: self.disorder_std,
            ising: IsingParams {
                num_qubits,
                coupling: self.coupling,
                alpha: self.alpha,
                omega: self.omega,
            },
        })
    }

    /// `θ ↦` phase-encoded GHZ state after dephasing for `time`.
    pub fn family(&self, num_qubits: usize, time: f64) -> Result<impl Fn(f64) -> Result<DensityMatrix>> {
        let base = dephase(
            &ghz_prepare(num_qubits)?.to_density(),
            &DephasingParams { gamma: self.gamma, t: time },
        )?;
        Ok(move |theta: f64| encode_phase(&base, theta, num_qubits))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BudgetOptions {
    pub repetitions: usize,
    pub n_min: usize,
    pub n_max: usize,
    pub mixedness: MixednessRule,
}

impl Default for BudgetOptions {
    fn default() -> Self {
        Self {
            repetitions: 20,
            n_min: 8,
            n_max: 8192,
            mixedness: MixednessRule::Signed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetResult {
    pub num_qubits: usize,
    /// Smallest probed `n` meeting the threshold; `None` past the ceiling.
    pub n_required: Option<usize>,
    /// Mean relative error at `n_required` (or at the ceiling).
    pub mean_relative_error: f64,
    /// Mean sub-QFI estimate over the repetitions at that `n`, and its
    /// standard error.
    pub estimate: f64,
    pub estimate_error: f64,
    /// Exact sub-QFI at the scenario's `dθ`.
    pub oracle: f64,
    /// Every `(n, mean relative error)` probe, in probing order.
    pub probes: Vec<(usize, f64)>,
}

/// Pool of per-unitary terms for one (reference, shifted) pair, grown on demand.
struct TermPool {
    ensemble: Ensemble,
    engine: MeasurementEngine,
    seed: SeedStream,
    table: PairTermTable,
}

impl TermPool {
    fn ensure(&mut self, len: usize) -> Result<()> {
        let have = self.table.len();
        if len > have {
            let more = pair_terms(&self.engine, &[(0, 1)], &self.ensemble, have as u64..len as u64, None, self.seed)?;
            self.table.extend(more);
        }
        Ok(())
    }
}

/// Smallest `n` whose mean relative error of the single-`dθ` sub-QFI
/// estimate, over `repetitions` disjoint blocks of unitaries, is below
/// `epsilon`. Doubling from `n_min`, then bisection.
pub fn required_measurements(
    scenario: &ManyBodyScenario,
    epsilon: f64,
    qubit_counts: &[usize],
    seed: SeedStream,
    opts: &BudgetOptions,
) -> Result<Vec<BudgetResult>> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::param(format!("epsilon must lie in (0, 1], got {epsilon}")));
    }
    if opts.repetitions == 0 || opts.n_min == 0 || opts.n_max < opts.n_min {
        return Err(Error::param("budget options need repetitions >= 1 and 1 <= n_min <= n_max"));
    }
    qubit_counts
        .iter()
        .map(|&nq| required_for(scenario, epsilon, nq, seed.derive(nq as u64), opts))
        .collect()
}

fn required_for(
    scenario: &ManyBodyScenario,
    epsilon: f64,
    num_qubits: usize,
    seed: SeedStream,
    opts: &BudgetOptions,
) -> Result<BudgetResult> {
    let family = scenario.family(num_qubits, scenario.time)?;
    let dtheta = scenario.dtheta;
    let oracle = sub_qfi_exact(&family, scenario.theta0, dtheta)?.value;
    let states = vec![family(scenario.theta0)?, family(scenario.theta0 + dtheta)?];
    let mut pool = TermPool {
        ensemble: Ensemble::new(scenario.ensemble(num_qubits), seed)?,
        engine: MeasurementEngine::new(&states)?,
        seed,
        table: PairTermTable {
            num_pairs: 1,
            terms: Vec::new(),
        },
    };
    let rule = opts.mixedness;
    let reps = opts.repetitions;
    let mut probes = Vec::new();
    let mut error_at = |n: usize, pool: &mut TermPool| -> Result<Probe> {
        pool.ensure(reps * n)?;
        let estimates: Vec<f64> = (0..reps)
            .map(|r| {
                let t = pool.table.mean_over(r * n..(r + 1) * n)[0];
                bures_estimate(rule.superfidelity(&t)) / (dtheta * dtheta)
            })
            .collect();
        let errs: Vec<f64> = estimates.iter().map(|e| (e - oracle).abs() / oracle).collect();
        let (estimate, estimate_error) = mean_and_error(&estimates);
        let p = Probe {
            n,
            relative_error: mean_and_error(&errs).0,
            estimate,
            estimate_error,
        };
        probes.push((n, p.relative_error));
        Ok(p)
    };
    let mut n = opts.n_min;
    let mut probe = error_at(n, &mut pool)?;
    let mut lo = None;
    while probe.relative_error >= epsilon {
        if n == opts.n_max {
            return Ok(probe.into_result(num_qubits, None, oracle, probes));
        }
        lo = Some(n);
        n = (2 * n).min(opts.n_max);
        probe = error_at(n, &mut pool)?;
    }
    let mut best = probe;
    if let Some(mut lo) = lo {
        while best.n - lo > 1.max(lo / 32) {
            let mid = (lo + best.n) / 2;
            let p = error_at(mid, &mut pool)?;
            if p.relative_error < epsilon {
                best = p;
            } else {
                lo = mid;
            }
        }
    }
    Ok(best.into_result(num_qubits, Some(best.n), oracle, probes))
}

#[derive(Debug, Clone, Copy)]
struct Probe {
    n: usize,
    relative_error: f64,
    estimate: f64,
    estimate_error: f64,
}

impl Probe {
    fn into_result(self, num_qubits: usize, n_required: Option<usize>, oracle: f64, probes: Vec<(usize, f64)>) -> BudgetResult {
        BudgetResult {
            num_qubits,
            n_required,
            mean_relative_error: self.relative_error,
            estimate: self.estimate,
            estimate_error: self.estimate_error,
            oracle,
            probes,
        }
    }
}

/// Fit of `n = 2^{a + bN}` by ordinary least squares on `log₂ n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentialFit {
    pub a: f64,
    pub b: f64,
    pub a_error: f64,
    pub b_error: f64,
}

pub fn fit_exponential(points: &[(usize, usize)]) -> Result<ExponentialFit> {
    if points.len() < 2 {
        return Err(Error::param("exponential fit needs at least two points"));
    }
    let m = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0 as f64).collect();
    let ys: Vec<f64> = points.iter().map(|p| (p.1 as f64).log2()).collect();
    let xm = xs.iter().sum::<f64>() / m;
    let ym = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - xm).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::RankDeficient);
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let b = sxy / sxx;
    let a = ym - b * xm;
    let s2 = if points.len() > 2 {
        xs.iter().zip(&ys).map(|(x, y)| (y - a - b * x).powi(2)).sum::<f64>() / (m - 2.0)
    } else {
        0.0
    };
    Ok(ExponentialFit {
        a,
        b,
        a_error: (s2 * (1.0 / m + xm * xm / sxx)).sqrt(),
        b_error: (s2 / sxx).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::ramsey_state_with_phase;
    use crate::metrics::exact_qfi_family;
    use std::f64::consts::FRAC_PI_2;

    fn ramsey(theta: f64) -> Result<DensityMatrix> {
        Ok(ramsey_state_with_phase(FRAC_PI_2, theta, 1.0))
    }

    fn exact_sweep(grid: &[f64], values: Vec<f64>) -> SweepResult {
        SweepResult {
            theta0: 0.0,
            dtheta_grid: grid.to_vec(),
            dg_values: values,
            dg_errors: vec![0.0; grid.len()],
            n_unitaries: 1,
            reference_purity: 1.0,
            reference_purity_error: 0.0,
            replicates: Vec::new(),
        }
    }

    #[test]
    fn pure_polynomial_is_recovered_exactly() {
        let grid = default_grid();
        let fit = fit_quadratic(&exact_sweep(&grid, grid.iter().map(|d| 3.7 * d * d).collect())).unwrap();
        assert!((fit.sub_qfi - 3.7).abs() < 1e-12);
        assert!(fit.coefficients[1].abs() < 1e-10 && fit.coefficients[2].abs() < 1e-9);
        assert!(fit.residual_norm >= 0.0);
    }

    #[test]
    fn fit_matches_small_step_sub_qfi() {
        let grid: Vec<f64> = (1..=10).map(|k| 0.05 * k as f64).collect();
        let curve = exact_dg_curve(ramsey, 0.0, &grid).unwrap();
        let fit = fit_quadratic(&exact_sweep(&grid, curve)).unwrap();
        let oracle = sub_qfi_exact(ramsey, 0.0, 1e-4).unwrap().value;
        assert!((fit.sub_qfi / oracle - 1.0).abs() < 5e-3, "{} vs {oracle}", fit.sub_qfi);
        // pure qubit: D_G = 8(1 − cos(dθ/2))
        for (d, v) in grid.iter().zip(exact_dg_curve(ramsey, 0.0, &grid).unwrap()) {
            assert!((v - 8.0 * (1.0 - (d / 2.0).cos())).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_fits_fail() {
        assert!(fit_powers(&[0.1, 0.2], &[0.0, 0.0], None, 4).is_err());
        assert!(matches!(
            fit_powers(&[0.1, 0.1, 0.1, 0.1], &[1.0, 1.0, 1.0, 1.0], None, 4),
            Err(Error::RankDeficient)
        ));
        let s = exact_sweep(&[0.1, 0.2], vec![0.01, 0.04]);
        assert!(fit_quadratic(&s).is_err());
    }

    #[test]
    fn witness_cases() {
        let w = witness(64.0, 8).unwrap();
        assert_eq!((w.qfi_density, w.m_witnessed, w.depth()), (8.0, 7, 8));
        assert_eq!(witness(4.0, 4).unwrap().m_witnessed, 0);
        assert_eq!(witness(0.0, 4).unwrap().m_witnessed, 0);
        assert_eq!(witness(9.0, 4).unwrap().m_witnessed, 2);
        assert_eq!(witness(8.0, 4).unwrap().m_witnessed, 1);
        assert!(witness(-1.0, 4).is_err());
        assert!(witness(f64::NAN, 4).is_err());
    }

    #[test]
    fn constant_family_sweeps_to_zero() {
        let rho = DensityMatrix::basis(2, 1).unwrap();
        let s = sweep_dg(
            |_| Ok(rho.clone()),
            0.0,
            &default_grid(),
            &EnsembleSpec::local_haar(2),
            200,
            SeedStream::new(1),
            &SweepOptions::default(),
        )
        .unwrap();
        for (v, e) in s.dg_values.iter().zip(&s.dg_errors) {
            assert!(v.abs() <= 3.0 * e + 1e-12, "{v} ± {e}");
        }
        assert!(sweep_dg(ramsey, 0.0, &[], &EnsembleSpec::single_qubit_euler(), 10, SeedStream::new(1), &SweepOptions::default()).is_err());
    }

    #[test]
    fn pure_ramsey_sweep_fits_unit_qfi() {
        let s = sweep_dg(
            ramsey,
            0.0,
            &default_grid(),
            &EnsembleSpec::single_qubit_euler(),
            400,
            SeedStream::new(2),
            &SweepOptions::default(),
        )
        .unwrap();
        let fit = fit_quadratic(&s).unwrap();
        let exact = exact_qfi_family(ramsey, 0.0).unwrap().value;
        assert!((exact - 1.0).abs() < 1e-8);
        assert!((fit.sub_qfi - exact).abs() < 3.0 * fit.sub_qfi_error, "{fit:?}");
        assert!(fit.weighted && fit.bootstrap_error > 0.0);
    }

    #[test]
    fn sweeps_are_reproducible() {
        let run = || {
            sweep_dg(ramsey, 0.3, &default_grid(), &EnsembleSpec::single_qubit_euler(), 50, SeedStream::new(9), &SweepOptions::default())
                .unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn budget_trivial_threshold_returns_minimum() {
        let sc = ManyBodyScenario::default();
        let opts = BudgetOptions {
            repetitions: 3,
            n_min: 16,
            n_max: 64,
            ..BudgetOptions::default()
        };
        for r in required_measurements(&sc, 1.0, &[2, 3], SeedStream::new(1), &opts).unwrap() {
            assert_eq!(r.n_required, Some(16));
            assert_eq!(r.probes.len(), 1);
        }
        assert!(required_measurements(&sc, 0.0, &[2], SeedStream::new(1), &opts).is_err());
    }

    #[test]
    fn exponential_fit_recovers_line() {
        let pts: Vec<(usize, usize)> = (2..=8).map(|n| (n, 2f64.powf(6.0 + 0.5 * n as f64).round() as usize)).collect();
        let f = fit_exponential(&pts).unwrap();
        assert!((f.b - 0.5).abs() < 1e-3 && (f.a - 6.0).abs() < 1e-2);
        assert!(fit_exponential(&[(3, 10)]).is_err());
    }
}
