//! Scenario runners.

use super::config::{GhzPreparation, IsingSettings, ScenarioConfig, ScenarioParams, SweepSettings};
use super::output::{format_float, LabeledExponentialFit, LabeledFit, ResultRow, RunOutput};
use crate::dynamics::{dephase, encode_phase, ghz_circuit, ghz_prepare, ramsey_state_with_phase, DephasingParams};
use crate::error::{Error, Result};
use crate::metrics::{exact_qfi_unitary, sub_qfi_exact};
use crate::pipeline::{
    fit_exponential, fit_sweep, required_measurements, sweep_dg_batch, witness, BudgetOptions, ManyBodyScenario,
    SweepInput, SweepOptions,
};
use crate::randmeas::estimators::{bures_estimate, record_terms, std_dev, PairTerms};
use crate::randmeas::{
    estimate_fidelity_single_qubit, estimate_overlap, estimate_purity, estimate_superfidelity_with, Bootstrap,
    EnsembleKind, EnsembleSpec, Estimate, MeasurementRecord, MixednessRule, SeedStream,
};
use serde::Serialize;
use crate::state::{collective_spin, purity, Axis, DensityMatrix};

/// Step used for the dθ → 0 sub-QFI oracle of fitted values.
const ORACLE_STEP: f64 = 1e-4;

struct RowTemplate<'a> {
    cfg: &'a ScenarioConfig,
    series: String,
    variable: &'static str,
}

impl RowTemplate<'_> {
    #[allow(clippy::too_many_arguments)]
    fn row(&self, value: f64, quantity: &str, estimate: f64, error: f64, oracle: f64, n: usize) -> ResultRow {
        ResultRow {
            scenario: self.cfg.scenario.name().into(),
            series: self.series.clone(),
            variable: self.variable.into(),
            value,
            quantity: quantity.into(),
            estimate,
            error,
            oracle,
            exact_qfi: None,
            coherence: None,
            witnessed_depth: None,
            n_unitaries: n,
            seed: self.cfg.seed,
        }
    }
}

fn sweep_options(cfg: &ScenarioConfig, sweep: &SweepSettings) -> SweepOptions {
    SweepOptions {
        mixedness: cfg.mixedness,
        bootstrap_resamples: sweep.bootstrap_resamples,
        shots: sweep.shots,
    }
}

fn wrong_params(cfg: &ScenarioConfig) -> Error {
    Error::Config(format!("parameters do not match scenario {}", cfg.scenario.name()))
}

fn output(cfg: &ScenarioConfig, rows: Vec<ResultRow>, fits: Vec<LabeledFit>) -> RunOutput {
    RunOutput {
        config: cfg.clone(),
        rows,
        fits,
        exponential_fits: Vec::new(),
        notes: Vec::new(),
    }
}

/// Fitted QFI and estimated purity of the Ramsey state over evolution time.
pub fn run_ramsey_qfi_vs_time(cfg: &ScenarioConfig) -> Result<RunOutput> {
    let ScenarioParams::RamseyTime { sweep, ramsey } = &cfg.params else {
        return Err(wrong_params(cfg));
    };
    let phi = ramsey.phi_rad;
    let inputs = ramsey
        .times_us
        .iter()
        .map(|&t| {
            let env = (-(t / ramsey.t2star_us).powi(2)).exp();
            SweepInput::from_family(
                |theta| Ok(ramsey_state_with_phase(phi, theta, env)),
                ramsey.delta_rad_per_us * t,
                &sweep.dtheta_grid,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let results = sweep_dg_batch(
        &inputs,
        &EnsembleSpec::single_qubit_euler(),
        sweep.n_unitaries,
        SeedStream::new(cfg.seed),
        &sweep_options(cfg, sweep),
    )?;
    let tpl = RowTemplate {
        cfg,
        series: String::new(),
        variable: "t_us",
    };
    let mut rows = Vec::new();
    let mut fits = Vec::new();
    for ((t, inp), res) in ramsey.times_us.iter().zip(&inputs).zip(&results) {
        let fit = fit_sweep(res, sweep.fit_max_power)?;
        let exact = phi.sin().powi(2) * (-2.0 * (t / ramsey.t2star_us).powi(2)).exp();
        let mut r = tpl.row(*t, "qfi", fit.sub_qfi, fit.sub_qfi_error, exact, sweep.n_unitaries);
        r.exact_qfi = Some(exact);
        rows.push(r);
        rows.push(tpl.row(
            *t,
            "purity",
            res.reference_purity,
            res.reference_purity_error,
            purity(&inp.reference),
            sweep.n_unitaries,
        ));
        fits.push(LabeledFit {
            series: String::new(),
            variable: "t_us".into(),
            value: *t,
            fit,
        });
    }
    Ok(output(cfg, rows, fits))
}

/// Fitted QFI versus preparation angle at a fixed evolution time.
pub fn run_ramsey_qfi_vs_phi(cfg: &ScenarioConfig) -> Result<RunOutput> {
    let ScenarioParams::RamseyPhi { sweep, ramsey } = &cfg.params else {
        return Err(wrong_params(cfg));
    };
    let env = (-(ramsey.time_us / ramsey.t2star_us).powi(2)).exp();
    let theta0 = ramsey.delta_rad_per_us * ramsey.time_us;
    let inputs = ramsey
        .phi_grid_rad
        .iter()
        .map(|&phi| SweepInput::from_family(|theta| Ok(ramsey_state_with_phase(phi, theta, env)), theta0, &sweep.dtheta_grid))
        .collect::<Result<Vec<_>>>()?;
    let results = sweep_dg_batch(
        &inputs,
        &EnsembleSpec::single_qubit_euler(),
        sweep.n_unitaries,
        SeedStream::new(cfg.seed),
        &sweep_options(cfg, sweep),
    )?;
    let tpl = RowTemplate {
        cfg,
        series: String::new(),
        variable: "phi_rad",
    };
    let mut rows = Vec::new();
    let mut fits = Vec::new();
    for (phi, res) in ramsey.phi_grid_rad.iter().zip(&results) {
        let fit = fit_sweep(res, sweep.fit_max_power)?;
        let exact = phi.sin().powi(2) * env * env;
        let mut r = tpl.row(*phi, "qfi", fit.sub_qfi, fit.sub_qfi_error, exact, sweep.n_unitaries);
        r.exact_qfi = Some(exact);
        r.coherence = Some(0.5 * phi.sin().abs() * env);
        rows.push(r);
        fits.push(LabeledFit {
            series: String::new(),
            variable: "phi_rad".into(),
            value: *phi,
            fit,
        });
    }
    Ok(output(cfg, rows, fits))
}

/// D_G sweep and fitted sub-QFI for a phase-encoded GHZ state.
pub fn run_ghz_sweep(cfg: &ScenarioConfig) -> Result<RunOutput> {
    let ScenarioParams::Ghz { sweep, ghz } = &cfg.params else {
        return Err(wrong_params(cfg));
    };
    let n = ghz.num_qubits;
    let pure = match ghz.preparation {
        GhzPreparation::Circuit => ghz_circuit(n)?,
        GhzPreparation::Product => ghz_prepare(n)?,
    }
    .to_density();
    // Dephasing for a time that leaves coherence c on the extreme off-diagonal.
    let rho = dephase(
        &pure,
        &DephasingParams {
            gamma: 1.0,
            t: -ghz.ghz_coherence.ln() / (2.0 * n as f64),
        },
    )?;
    let family = |theta: f64| encode_phase(&rho, theta, n);
    let input = SweepInput::from_family(family, ghz.theta0_rad, &sweep.dtheta_grid)?;
    let res = sweep_dg_batch(
        std::slice::from_ref(&input),
        &EnsembleSpec::local_haar(n),
        sweep.n_unitaries,
        SeedStream::new(cfg.seed),
        &sweep_options(cfg, sweep),
    )?
    .remove(0);
    let series = if ghz.ghz_coherence < 1.0 {
        format!("synthetic_dephasing_c={}", ghz.ghz_coherence)
    } else {
        "ideal".to_string()
    };
    let tpl = RowTemplate {
        cfg,
        series: series.clone(),
        variable: "dtheta_rad",
    };
    let mut rows = Vec::new();
    for ((d, v), e) in res.dtheta_grid.iter().zip(&res.dg_values).zip(&res.dg_errors) {
        let exact = sub_qfi_exact(family, ghz.theta0_rad, *d)?.value * d * d;
        rows.push(tpl.row(*d, "dg", *v, *e, exact, sweep.n_unitaries));
    }
    let fit = fit_sweep(&res, sweep.fit_max_power)?;
    let exact_qfi = exact_qfi_unitary(&family(ghz.theta0_rad)?, &collective_spin(Axis::Z, n)?)?.value;
    let oracle = sub_qfi_exact(family, ghz.theta0_rad, ORACLE_STEP)?.value;
    let fit_tpl = RowTemplate {
        cfg,
        series: series.clone(),
        variable: "theta0_rad",
    };
    let mut r = fit_tpl.row(ghz.theta0_rad, "sub_qfi", fit.sub_qfi, fit.sub_qfi_error, oracle, sweep.n_unitaries);
    r.exact_qfi = Some(exact_qfi);
    r.witnessed_depth = Some(witness(fit.sub_qfi.max(0.0), n)?.depth());
    rows.push(r);
    let fits = vec![LabeledFit {
        series,
        variable: "theta0_rad".into(),
        value: ghz.theta0_rad,
        fit,
    }];
    Ok(output(cfg, rows, fits))
}

fn manybody_scenario(ising: &IsingSettings) -> ManyBodyScenario {
    ManyBodyScenario {
        ensemble_kind: ising.ensemble,
        coupling: ising.coupling_per_t,
        alpha: ising.alpha,
        omega: ising.omega_per_t,
        segments: ising.segments,
        segment_duration: ising.segment_duration_t,
        disorder_std: ising.disorder_std_per_t,
        gamma: 0.0,
        time: 0.0,
        theta0: 0.0,
        dtheta: ising.dtheta_rad,
    }
}

fn gamma_series(gamma: f64) -> String {
    format!("gamma_per_t={gamma}")
}

/// Measurement budget versus qubit count, with exponential fits per series.
pub fn run_manybody_scaling(cfg: &ScenarioConfig) -> Result<RunOutput> {
    let ScenarioParams::Scaling { ising, scaling } = &cfg.params else {
        return Err(wrong_params(cfg));
    };
    let opts = BudgetOptions {
        repetitions: scaling.repetitions,
        n_min: scaling.n_min,
        n_max: scaling.n_max,
        mixedness: cfg.mixedness,
    };
    let seed = SeedStream::new(cfg.seed);
    let mut rows = Vec::new();
    let mut exp_fits = Vec::new();
    let mut notes = Vec::new();
    for (k, &gamma) in scaling.gammas_per_t.iter().enumerate() {
        let mut sc = manybody_scenario(ising);
        sc.gamma = gamma;
        sc.time = if gamma > 0.0 { scaling.mixed_time_t } else { 0.0 };
        let series = gamma_series(gamma);
        let results = required_measurements(&sc, scaling.epsilon, &scaling.qubit_counts, seed.derive(k as u64), &opts)?;
        let tpl = RowTemplate {
            cfg,
            series: series.clone(),
            variable: "num_qubits",
        };
        let mut points = Vec::new();
        for r in &results {
            let (quantity, n) = match r.n_required {
                Some(n) => {
                    points.push((r.num_qubits, n));
                    ("sub_qfi", n)
                }
                None => {
                    notes.push(format!(
                        "{series}: N={} did not reach epsilon={} by n_max={} (mean relative error {:.4})",
                        r.num_qubits, scaling.epsilon, scaling.n_max, r.mean_relative_error
                    ));
                    ("sub_qfi_at_ceiling", scaling.n_max)
                }
            };
            rows.push(tpl.row(r.num_qubits as f64, quantity, r.estimate, r.estimate_error, r.oracle, n));
        }
        let fit = if points.len() >= 2 { Some(fit_exponential(&points)?) } else { None };
        exp_fits.push(LabeledExponentialFit { series, points, fit });
    }
    Ok(RunOutput {
        config: cfg.clone(),
        rows,
        fits: Vec::new(),
        exponential_fits: exp_fits,
        notes,
    })
}

/// Single-dθ sub-QFI estimates of a dephasing GHZ state over time.
pub fn run_manybody_time_evolution(cfg: &ScenarioConfig) -> Result<RunOutput> {
    let ScenarioParams::TimeEvolution { ising, evolution } = &cfg.params else {
        return Err(wrong_params(cfg));
    };
    let n = evolution.num_qubits;
    let dtheta = ising.dtheta_rad;
    let base = manybody_scenario(ising);
    let jz = collective_spin(Axis::Z, n)?;
    let mut inputs = Vec::new();
    let mut meta = Vec::new();
    for &gamma in &evolution.gammas_per_t {
        let sc = ManyBodyScenario { gamma, ..base };
        for &t in &evolution.times_t {
            let family = sc.family(n, t)?;
            let reference: DensityMatrix = family(0.0)?;
            let oracle = sub_qfi_exact(&family, 0.0, dtheta)?.value;
            let exact_qfi = exact_qfi_unitary(&reference, &jz)?.value;
            inputs.push(SweepInput {
                theta0: 0.0,
                grid: vec![dtheta],
                shifted: vec![family(dtheta)?],
                reference,
            });
            meta.push((gamma, t, oracle, exact_qfi));
        }
    }
    let opts = SweepOptions {
        mixedness: cfg.mixedness,
        bootstrap_resamples: evolution.bootstrap_resamples,
        shots: None,
    };
    let results = sweep_dg_batch(&inputs, &base.ensemble(n), evolution.n_unitaries, SeedStream::new(cfg.seed), &opts)?;
    let scale = 1.0 / (dtheta * dtheta);
    let mut rows = Vec::new();
    for ((gamma, t, oracle, exact_qfi), res) in meta.into_iter().zip(&results) {
        let tpl = RowTemplate {
            cfg,
            series: gamma_series(gamma),
            variable: "time_t",
        };
        let est = res.dg_values[0] * scale;
        let err = res.dg_errors[0] * scale;
        let mut r = tpl.row(t, "sub_qfi", est, err, oracle, evolution.n_unitaries);
        r.exact_qfi = Some(exact_qfi);
        r.witnessed_depth = Some(witness(est.max(0.0), n)?.depth());
        rows.push(r);
        let nf = n as f64;
        let mut d = tpl.row(t, "qfi_density", est / nf, err / nf, oracle / nf, evolution.n_unitaries);
        d.exact_qfi = Some(exact_qfi / nf);
        rows.push(d);
    }
    Ok(output(cfg, rows, Vec::new()))
}

/// Dispatches on the configured scenario.
pub fn run(cfg: &ScenarioConfig) -> Result<RunOutput> {
    use super::config::Scenario::*;
    match cfg.scenario {
        RamseyQfiVsTime => run_ramsey_qfi_vs_time(cfg),
        RamseyQfiVsPhi => run_ramsey_qfi_vs_phi(cfg),
        GhzSweep => run_ghz_sweep(cfg),
        ManybodyScaling => run_manybody_scaling(cfg),
        ManybodyTimeEvolution => run_manybody_time_evolution(cfg),
    }
}

/// One estimator applied to an ingested record file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecordEstimate {
    pub quantity: String,
    pub estimate: f64,
    pub error: f64,
    pub n_unitaries: usize,
    pub method: String,
}

pub const RECORD_CSV_HEADER: &str = "quantity,estimate,error,n_unitaries";

/// Estimates available from external records. Records without a second
/// state yield only the purity; single-qubit pairs add the direct fidelity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecordSummary {
    pub num_qubits: usize,
    pub ensemble: EnsembleKind,
    pub shots: Option<u64>,
    pub estimates: Vec<RecordEstimate>,
}

impl RecordSummary {
    pub fn csv(&self) -> String {
        let mut out = format!("{RECORD_CSV_HEADER}\n");
        for e in &self.estimates {
            out.push_str(&format!(
                "{},{},{},{}\n",
                e.quantity,
                format_float(e.estimate),
                format_float(e.error),
                e.n_unitaries
            ));
        }
        out
    }

    pub fn json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }
}

pub fn estimate_from_records(
    records: &[MeasurementRecord],
    rule: MixednessRule,
    bootstrap: &Bootstrap,
) -> Result<RecordSummary> {
    let first = records
        .first()
        .ok_or_else(|| Error::Estimator("record file contains no records".into()))?;
    let n = first.num_qubits;
    let mut estimates = Vec::new();
    let mut push = |quantity: &str, e: Estimate| {
        estimates.push(RecordEstimate {
            quantity: quantity.into(),
            estimate: e.value,
            error: e.std_error,
            n_unitaries: e.n_unitaries,
            method: e.method,
        })
    };
    push("purity_a", estimate_purity(records, n)?);
    if first.probabilities_b.is_some() {
        let swapped: Vec<MeasurementRecord> = records
            .iter()
            .map(|r| MeasurementRecord {
                probabilities_a: r.probabilities_b.clone().unwrap_or_default(),
                probabilities_b: Some(r.probabilities_a.clone()),
                ..r.clone()
            })
            .collect();
        push("purity_b", estimate_purity(&swapped, n)?);
        push("overlap", estimate_overlap(records, n)?);
        let g = estimate_superfidelity_with(records, n, rule, bootstrap)?;
        let terms = record_terms(records, n)?;
        let reps = bootstrap.replicates(terms.len(), |idx| {
            bures_estimate(rule.superfidelity(&PairTerms::mean(idx.iter().map(|&i| terms[i]))))
        });
        push(
            "bures_distance",
            Estimate {
                value: bures_estimate(g.value),
                std_error: std_dev(&reps),
                n_unitaries: g.n_unitaries,
                method: g.method.clone(),
            },
        );
        push("superfidelity", g);
        if n == 1 {
            push("fidelity_single_qubit", estimate_fidelity_single_qubit(records)?);
        }
    }
    Ok(RecordSummary {
        num_qubits: n,
        ensemble: first.ensemble,
        shots: first.shots,
        estimates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::config::{Overrides, Scenario};
    use crate::randmeas::generate_records;

    fn cfg(text: &str) -> ScenarioConfig {
        ScenarioConfig::parse(text, "test", &Overrides::default()).unwrap()
    }

    #[test]
    fn ramsey_time_edge_rows() {
        let c = cfg("scenario = \"ramsey_qfi_vs_time\"\nseed = 4\nn_unitaries = 100\nbootstrap_resamples = 50\ntimes_us = [0.0, 2.58]\n");
        let out = run_ramsey_qfi_vs_time(&c).unwrap();
        let qfi: Vec<&ResultRow> = out.rows.iter().filter(|r| r.quantity == "qfi").collect();
        assert!((qfi[0].oracle - 1.0).abs() < 1e-12);
        assert!((qfi[1].oracle - (-2.0f64).exp()).abs() < 1e-12);
        let pur: Vec<&ResultRow> = out.rows.iter().filter(|r| r.quantity == "purity").collect();
        assert!((pur[0].oracle - 1.0).abs() < 1e-12);
        assert_eq!(out.fits.len(), 2);
    }

    #[test]
    fn ramsey_phi_edges() {
        let c = cfg("scenario = \"ramsey_qfi_vs_phi\"\nseed = 4\nn_unitaries = 100\nbootstrap_resamples = 50\n");
        let out = run_ramsey_qfi_vs_phi(&c).unwrap();
        let first = &out.rows[0];
        assert_eq!(first.value, 0.0);
        assert_eq!(first.oracle, 0.0);
        assert_eq!(first.coherence, Some(0.0));
        assert!(first.estimate.abs() < 1e-9);
        let best = out
            .rows
            .iter()
            .max_by(|a, b| a.oracle.total_cmp(&b.oracle))
            .unwrap();
        assert!((best.value - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        let coh_best = out
            .rows
            .iter()
            .max_by(|a, b| a.coherence.unwrap().total_cmp(&b.coherence.unwrap()))
            .unwrap();
        assert_eq!(coh_best.value, best.value);
    }

    #[test]
    fn ghz_sweep_dephased_oracles() {
        let c = cfg("scenario = \"ghz_sweep\"\nseed = 2\nn_unitaries = 50\nbootstrap_resamples = 20\nghz_coherence = 0.8\n");
        let out = run_ghz_sweep(&c).unwrap();
        let fit_row = out.rows.last().unwrap();
        assert_eq!(fit_row.quantity, "sub_qfi");
        assert!((fit_row.exact_qfi.unwrap() - 10.24).abs() < 1e-8);
        assert!(fit_row.oracle <= fit_row.exact_qfi.unwrap() + 1e-9);
    }

    #[test]
    fn records_yield_all_estimates() {
        let a = ramsey_state_with_phase(1.0, 0.2, 0.9);
        let b = ramsey_state_with_phase(1.0, 0.5, 0.9);
        let recs = generate_records(&EnsembleSpec::single_qubit_euler(), SeedStream::new(3), &a, Some(&b), 400, None).unwrap();
        let s = estimate_from_records(&recs, MixednessRule::default(), &Bootstrap::new(100, SeedStream::new(1))).unwrap();
        let q: Vec<&str> = s.estimates.iter().map(|e| e.quantity.as_str()).collect();
        assert_eq!(
            q,
            ["purity_a", "purity_b", "overlap", "bures_distance", "superfidelity", "fidelity_single_qubit"]
        );
        let csv = s.csv();
        assert!(csv.starts_with(RECORD_CSV_HEADER));
        assert_eq!(csv.lines().count(), 7);
        let exact_pb = purity(&b);
        let pb = &s.estimates[1];
        assert!((pb.estimate - exact_pb).abs() < 5.0 * pb.error);
        assert!(estimate_from_records(&[], MixednessRule::default(), &Bootstrap::new(10, SeedStream::new(1))).is_err());
    }

    #[test]
    fn wrong_params_are_rejected() {
        let c = ScenarioConfig::defaults(Scenario::GhzSweep, 1).unwrap();
        assert!(run_ramsey_qfi_vs_time(&c).is_err());
    }
}
