//! Scenario configuration.
//!
//! Configs are flat TOML: one `key = value` per line, lists as `[a, b]`,
//! strings quoted. Unit suffixes are part of the key: `_rad`, `_us`
//! (microseconds), `_rad_per_us`, and for many-body keys `_t` (multiples of
//! the segment duration T) and `_per_t` (multiples of 1/T). Unknown keys and
//! keys that do not apply to the chosen scenario are rejected.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::{default_grid, validate_grid};
use crate::randmeas::{EnsembleKind, MixednessRule};
use crate::tolerance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    RamseyQfiVsTime,
    RamseyQfiVsPhi,
    GhzSweep,
    ManybodyScaling,
    ManybodyTimeEvolution,
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Self::RamseyQfiVsTime => "ramsey_qfi_vs_time",
            Self::RamseyQfiVsPhi => "ramsey_qfi_vs_phi",
            Self::GhzSweep => "ghz_sweep",
            Self::ManybodyScaling => "manybody_scaling",
            Self::ManybodyTimeEvolution => "manybody_time_evolution",
        }
    }

    fn keys(&self) -> Vec<&'static str> {
        const SWEEP: &[&str] = &["n_unitaries", "shots", "bootstrap_resamples", "fit_max_power", "dtheta_grid"];
        const ISING: &[&str] = &[
            "ensemble",
            "coupling_per_t",
            "alpha",
            "omega_per_t",
            "disorder_std_per_t",
            "segments",
            "segment_duration_t",
            "dtheta_rad",
        ];
        match self {
            Self::RamseyQfiVsTime => concat(&[SWEEP, &["phi_rad", "delta_rad_per_us", "t2star_us", "times_us"]]),
            Self::RamseyQfiVsPhi => concat(&[SWEEP, &["phi_grid_rad", "delta_rad_per_us", "t2star_us", "time_us"]]),
            Self::GhzSweep => concat(&[SWEEP, &["num_qubits", "preparation", "ghz_coherence", "theta0_rad"]]),
            Self::ManybodyScaling => concat(&[
                ISING,
                &["qubit_counts", "epsilon", "repetitions", "n_min", "n_max", "gammas_per_t", "mixed_time_t"],
            ]),
            Self::ManybodyTimeEvolution => concat(&[
                ISING,
                &["num_qubits", "n_unitaries", "bootstrap_resamples", "gammas_per_t", "times_t"],
            ]),
        }
    }
}

fn concat(parts: &[&[&'static str]]) -> Vec<&'static str> {
    parts.iter().flat_map(|p| p.iter().copied()).collect()
}

const GLOBAL_KEYS: &[&str] = &["scenario", "seed", "output_path", "mixedness"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GhzPreparation {
    /// Hadamard plus CNOT chain.
    Circuit,
    /// Collective rotations and one-axis twisting.
    Product,
}

/// Every key any scenario accepts; all optional at this stage.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: Option<Scenario>,
    seed: Option<u64>,
    output_path: Option<PathBuf>,
    mixedness: Option<MixednessRule>,
    n_unitaries: Option<usize>,
    shots: Option<u64>,
    bootstrap_resamples: Option<usize>,
    fit_max_power: Option<usize>,
    dtheta_grid: Option<Vec<f64>>,
    phi_rad: Option<f64>,
    delta_rad_per_us: Option<f64>,
    t2star_us: Option<f64>,
    times_us: Option<Vec<f64>>,
    phi_grid_rad: Option<Vec<f64>>,
    time_us: Option<f64>,
    num_qubits: Option<usize>,
    preparation: Option<GhzPreparation>,
    ghz_coherence: Option<f64>,
    theta0_rad: Option<f64>,
    ensemble: Option<EnsembleKind>,
    coupling_per_t: Option<f64>,
    alpha: Option<f64>,
    omega_per_t: Option<f64>,
    disorder_std_per_t: Option<f64>,
    segments: Option<usize>,
    segment_duration_t: Option<f64>,
    dtheta_rad: Option<f64>,
    qubit_counts: Option<Vec<usize>>,
    epsilon: Option<f64>,
    repetitions: Option<usize>,
    n_min: Option<usize>,
    n_max: Option<usize>,
    gammas_per_t: Option<Vec<f64>>,
    mixed_time_t: Option<f64>,
    times_t: Option<Vec<f64>>,
}

/// Settings shared by the dθ-sweep scenarios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSettings {
    pub n_unitaries: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    pub bootstrap_resamples: usize,
    pub fit_max_power: usize,
    pub dtheta_grid: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RamseyTimeSettings {
    pub phi_rad: f64,
    pub delta_rad_per_us: f64,
    pub t2star_us: f64,
    pub times_us: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RamseyPhiSettings {
    pub phi_grid_rad: Vec<f64>,
    pub delta_rad_per_us: f64,
    pub t2star_us: f64,
    pub time_us: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GhzSettings {
    pub num_qubits: usize,
    pub preparation: GhzPreparation,
    /// Synthetic dephasing: coherence factor of the GHZ off-diagonal.
    pub ghz_coherence: f64,
    pub theta0_rad: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsingSettings {
    pub ensemble: EnsembleKind,
    pub coupling_per_t: f64,
    pub alpha: f64,
    pub omega_per_t: f64,
    pub disorder_std_per_t: f64,
    pub segments: usize,
    pub segment_duration_t: f64,
    pub dtheta_rad: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingSettings {
    pub qubit_counts: Vec<usize>,
    pub epsilon: f64,
    pub repetitions: usize,
    pub n_min: usize,
    pub n_max: usize,
    pub gammas_per_t: Vec<f64>,
    pub mixed_time_t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeEvolutionSettings {
    pub num_qubits: usize,
    pub n_unitaries: usize,
    pub bootstrap_resamples: usize,
    pub gammas_per_t: Vec<f64>,
    pub times_t: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ScenarioParams {
    RamseyTime {
        #[serde(flatten)]
        sweep: SweepSettings,
        #[serde(flatten)]
        ramsey: RamseyTimeSettings,
    },
    RamseyPhi {
        #[serde(flatten)]
        sweep: SweepSettings,
        #[serde(flatten)]
        ramsey: RamseyPhiSettings,
    },
    Ghz {
        #[serde(flatten)]
        sweep: SweepSettings,
        #[serde(flatten)]
        ghz: GhzSettings,
    },
    Scaling {
        #[serde(flatten)]
        ising: IsingSettings,
        #[serde(flatten)]
        scaling: ScalingSettings,
    },
    TimeEvolution {
        #[serde(flatten)]
        ising: IsingSettings,
        #[serde(flatten)]
        evolution: TimeEvolutionSettings,
    },
}

/// Fully resolved configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
    pub mixedness: MixednessRule,
    #[serde(flatten)]
    pub params: ScenarioParams,
}

/// Default Ramsey detuning, (2π)·1.459 rad/µs.
pub const RAMSEY_DELTA_RAD_PER_US: f64 = TAU * 1.459;
pub const RAMSEY_T2STAR_US: f64 = 2.58;

pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count)
            .map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64)
            .collect(),
    }
}

/// Overrides applied after parsing, typically from the command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub scenario: Option<Scenario>,
    pub seed: Option<u64>,
    pub output_path: Option<PathBuf>,
}

impl ScenarioConfig {
    /// Parses config text; `source` names it in error messages.
    pub fn parse(text: &str, source: &str, overrides: &Overrides) -> Result<Self> {
        let cfg_err = |msg: String| Error::Config(format!("{source}: {msg}"));
        let table: toml::Table = toml::from_str(text).map_err(|e| cfg_err(e.to_string()))?;
        let raw: RawConfig = toml::from_str(text).map_err(|e| cfg_err(e.to_string()))?;
        let line_of = |key: &str| -> String {
            text.lines()
                .position(|l| l.trim_start().starts_with(key) && l.trim_start()[key.len()..].trim_start().starts_with('='))
                .map(|i| format!("line {}: ", i + 1))
                .unwrap_or_default()
        };
        let scenario = match (raw.scenario, overrides.scenario) {
            (Some(a), Some(b)) if a != b => {
                return Err(cfg_err(format!(
                    "{}config is for scenario {} but {} was requested",
                    line_of("scenario"),
                    a.name(),
                    b.name()
                )))
            }
            (a, b) => b.or(a).ok_or_else(|| cfg_err("missing required key `scenario`".into()))?,
        };
        let allowed = scenario.keys();
        for key in table.keys() {
            if !GLOBAL_KEYS.contains(&key.as_str()) && !allowed.contains(&key.as_str()) {
                return Err(cfg_err(format!(
                    "{}key `{key}` does not apply to scenario {}",
                    line_of(key),
                    scenario.name()
                )));
            }
        }
        let seed = overrides
            .seed
            .or(raw.seed)
            .ok_or_else(|| cfg_err("missing required key `seed`".into()))?;
        let check = |ok: bool, key: &str, what: &str| -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(cfg_err(format!("{}`{key}` {what}", line_of(key))))
            }
        };
        let r = raw.clone();
        let sweep = |n_default: usize| -> Result<SweepSettings> {
            let s = SweepSettings {
                n_unitaries: r.n_unitaries.unwrap_or(n_default),
                shots: r.shots,
                bootstrap_resamples: r.bootstrap_resamples.unwrap_or(500),
                fit_max_power: r.fit_max_power.unwrap_or(crate::pipeline::DEFAULT_MAX_POWER),
                dtheta_grid: r.dtheta_grid.clone().unwrap_or_else(default_grid),
            };
            check(s.n_unitaries >= 2, "n_unitaries", "must be at least 2")?;
            check(s.shots != Some(0), "shots", "must be positive")?;
            check(s.bootstrap_resamples >= 2, "bootstrap_resamples", "must be at least 2")?;
            check((2..=8).contains(&s.fit_max_power), "fit_max_power", "must lie in 2..=8")?;
            check(
                validate_grid(&s.dtheta_grid).is_ok() && s.dtheta_grid.len() >= 4.max(s.fit_max_power - 1),
                "dtheta_grid",
                "must hold at least 4 strictly increasing positive values",
            )?;
            Ok(s)
        };
        let ramsey_common = |delta: Option<f64>, t2: Option<f64>| -> Result<(f64, f64)> {
            let delta = delta.unwrap_or(RAMSEY_DELTA_RAD_PER_US);
            let t2 = t2.unwrap_or(RAMSEY_T2STAR_US);
            check(delta.is_finite(), "delta_rad_per_us", "must be finite")?;
            check(t2 > 0.0 && t2.is_finite(), "t2star_us", "must be > 0")?;
            Ok((delta, t2))
        };
        let ising = || -> Result<IsingSettings> {
            let s = IsingSettings {
                ensemble: r.ensemble.unwrap_or(EnsembleKind::HamiltonianEvolution),
                coupling_per_t: r.coupling_per_t.unwrap_or(1.0),
                alpha: r.alpha.unwrap_or(1.5),
                omega_per_t: r.omega_per_t.unwrap_or(1.0),
                disorder_std_per_t: r.disorder_std_per_t.unwrap_or(1.0),
                segments: r.segments.unwrap_or(20),
                segment_duration_t: r.segment_duration_t.unwrap_or(1.0),
                dtheta_rad: r.dtheta_rad.unwrap_or(0.1),
            };
            check(s.ensemble != EnsembleKind::HaarSingleQubitEuler, "ensemble", "must be hamiltonian_evolution or haar_local_product")?;
            check(s.alpha > 0.0 && s.alpha < 3.0, "alpha", "must lie in (0, 3)")?;
            check(s.coupling_per_t.is_finite(), "coupling_per_t", "must be finite")?;
            check(s.omega_per_t.is_finite(), "omega_per_t", "must be finite")?;
            check(s.disorder_std_per_t >= 0.0 && s.disorder_std_per_t.is_finite(), "disorder_std_per_t", "must be >= 0")?;
            check(s.segments >= 1, "segments", "must be at least 1")?;
            check(s.segment_duration_t > 0.0 && s.segment_duration_t.is_finite(), "segment_duration_t", "must be > 0")?;
            check(s.dtheta_rad > 0.0 && s.dtheta_rad.is_finite(), "dtheta_rad", "must be > 0")?;
            Ok(s)
        };
        let gammas = || -> Result<Vec<f64>> {
            let g = r.gammas_per_t.clone().unwrap_or_else(|| vec![0.0, 0.01]);
            check(!g.is_empty() && g.iter().all(|x| *x >= 0.0 && x.is_finite()), "gammas_per_t", "must be a non-empty list of rates >= 0")?;
            Ok(g)
        };
        let qubits_ok = |n: usize| (2..=tolerance::MAX_QUBITS).contains(&n);
        let params = match scenario {
            Scenario::RamseyQfiVsTime => {
                let (delta, t2) = ramsey_common(r.delta_rad_per_us, r.t2star_us)?;
                let ramsey = RamseyTimeSettings {
                    phi_rad: r.phi_rad.unwrap_or(FRAC_PI_2),
                    delta_rad_per_us: delta,
                    t2star_us: t2,
                    times_us: r.times_us.clone().unwrap_or_else(|| linspace(0.0, 4.0, 10)),
                };
                check(ramsey.phi_rad.is_finite(), "phi_rad", "must be finite")?;
                check(
                    !ramsey.times_us.is_empty() && ramsey.times_us.iter().all(|t| *t >= 0.0 && t.is_finite()),
                    "times_us",
                    "must be a non-empty list of times >= 0",
                )?;
                ScenarioParams::RamseyTime { sweep: sweep(400)?, ramsey }
            }
            Scenario::RamseyQfiVsPhi => {
                let (delta, t2) = ramsey_common(r.delta_rad_per_us, r.t2star_us)?;
                check(delta != 0.0 || r.time_us.is_some(), "delta_rad_per_us", "must be nonzero unless time_us is set")?;
                let ramsey = RamseyPhiSettings {
                    phi_grid_rad: r.phi_grid_rad.clone().unwrap_or_else(|| linspace(0.0, PI, 11)),
                    delta_rad_per_us: delta,
                    t2star_us: t2,
                    time_us: r.time_us.unwrap_or(1.5 * PI / delta),
                };
                check(
                    !ramsey.phi_grid_rad.is_empty() && ramsey.phi_grid_rad.iter().all(|p| p.is_finite()),
                    "phi_grid_rad",
                    "must be a non-empty list of angles",
                )?;
                check(ramsey.time_us >= 0.0 && ramsey.time_us.is_finite(), "time_us", "must be >= 0")?;
                ScenarioParams::RamseyPhi { sweep: sweep(400)?, ramsey }
            }
            Scenario::GhzSweep => {
                let ghz = GhzSettings {
                    num_qubits: r.num_qubits.unwrap_or(4),
                    preparation: r.preparation.unwrap_or(GhzPreparation::Circuit),
                    ghz_coherence: r.ghz_coherence.unwrap_or(1.0),
                    theta0_rad: r.theta0_rad.unwrap_or(0.0),
                };
                check((1..=tolerance::MAX_QUBITS).contains(&ghz.num_qubits), "num_qubits", "must lie in 1..=12")?;
                check(ghz.ghz_coherence > 0.0 && ghz.ghz_coherence <= 1.0, "ghz_coherence", "must lie in (0, 1]")?;
                check(ghz.theta0_rad.is_finite(), "theta0_rad", "must be finite")?;
                ScenarioParams::Ghz { sweep: sweep(400)?, ghz }
            }
            Scenario::ManybodyScaling => {
                let scaling = ScalingSettings {
                    qubit_counts: r.qubit_counts.clone().unwrap_or_else(|| (2..=8).collect()),
                    epsilon: r.epsilon.unwrap_or(0.09),
                    repetitions: r.repetitions.unwrap_or(20),
                    n_min: r.n_min.unwrap_or(8),
                    n_max: r.n_max.unwrap_or(8192),
                    gammas_per_t: gammas()?,
                    mixed_time_t: r.mixed_time_t.unwrap_or(10.0),
                };
                check(
                    !scaling.qubit_counts.is_empty() && scaling.qubit_counts.iter().all(|n| qubits_ok(*n)),
                    "qubit_counts",
                    "must list qubit counts in 2..=12",
                )?;
                check(scaling.epsilon > 0.0 && scaling.epsilon <= 1.0, "epsilon", "must lie in (0, 1]")?;
                check(scaling.repetitions >= 1, "repetitions", "must be at least 1")?;
                check(scaling.n_min >= 1, "n_min", "must be at least 1")?;
                check(scaling.n_max >= scaling.n_min, "n_max", "must be >= n_min")?;
                check(scaling.mixed_time_t >= 0.0 && scaling.mixed_time_t.is_finite(), "mixed_time_t", "must be >= 0")?;
                ScenarioParams::Scaling { ising: ising()?, scaling }
            }
            Scenario::ManybodyTimeEvolution => {
                let gammas = gammas()?;
                let gmax = gammas.iter().copied().fold(0.0, f64::max);
                let evolution = TimeEvolutionSettings {
                    num_qubits: r.num_qubits.unwrap_or(8),
                    n_unitaries: r.n_unitaries.unwrap_or(1000),
                    bootstrap_resamples: r.bootstrap_resamples.unwrap_or(500),
                    times_t: r
                        .times_t
                        .clone()
                        .unwrap_or_else(|| linspace(0.0, if gmax > 0.0 { 1.0 / gmax } else { 1.0 }, 20)),
                    gammas_per_t: gammas,
                };
                check(qubits_ok(evolution.num_qubits), "num_qubits", "must lie in 2..=12")?;
                check(evolution.n_unitaries >= 2, "n_unitaries", "must be at least 2")?;
                check(evolution.bootstrap_resamples >= 2, "bootstrap_resamples", "must be at least 2")?;
                check(
                    !evolution.times_t.is_empty() && evolution.times_t.iter().all(|t| *t >= 0.0 && t.is_finite()),
                    "times_t",
                    "must be a non-empty list of times >= 0",
                )?;
                ScenarioParams::TimeEvolution { ising: ising()?, evolution }
            }
        };
        Ok(Self {
            scenario,
            seed,
            output_path: overrides.output_path.clone().or(raw.output_path),
            mixedness: raw.mixedness.unwrap_or_default(),
            params,
        })
    }

    /// Reads, validates and resolves a config file.
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, &path.display().to_string(), overrides)
    }

    /// Defaults for `scenario`, with only the seed supplied.
    pub fn defaults(scenario: Scenario, seed: u64) -> Result<Self> {
        Self::parse(
            "",
            "defaults",
            &Overrides {
                scenario: Some(scenario),
                seed: Some(seed),
                output_path: None,
            },
        )
    }

    /// Resolved configuration in the same flat TOML grammar.
    pub fn echo(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

/// [`ScenarioConfig::load`] under the operation's name.
pub fn validate_and_echo_config(path: &Path) -> Result<ScenarioConfig> {
    ScenarioConfig::load(path, &Overrides::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ScenarioConfig> {
        ScenarioConfig::parse(text, "test", &Overrides::default())
    }

    #[test]
    fn minimal_ramsey_config_resolves_defaults() {
        let cfg = parse("scenario = \"ramsey_qfi_vs_time\"\nseed = 7\n").unwrap();
        let echo = cfg.echo();
        for key in ["seed", "n_unitaries", "bootstrap_resamples", "dtheta_grid", "phi_rad", "delta_rad_per_us", "t2star_us", "times_us", "mixedness"] {
            assert!(echo.contains(key), "echo lacks {key}:\n{echo}");
        }
        let again = parse(&echo).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn every_scenario_echo_round_trips() {
        for sc in [
            Scenario::RamseyQfiVsTime,
            Scenario::RamseyQfiVsPhi,
            Scenario::GhzSweep,
            Scenario::ManybodyScaling,
            Scenario::ManybodyTimeEvolution,
        ] {
            let cfg = ScenarioConfig::defaults(sc, 1).unwrap();
            assert_eq!(parse(&cfg.echo()).unwrap(), cfg, "{}", sc.name());
        }
    }

    #[test]
    fn unknown_key_is_named() {
        let err = parse("scenario = \"ghz_sweep\"\nseed = 1\ndteta_grid = [0.1, 0.2]\n").unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        assert!(err.to_string().contains("dteta_grid"), "{err}");
    }

    #[test]
    fn seed_is_mandatory() {
        let err = parse("scenario = \"ghz_sweep\"\n").unwrap_err();
        assert!(err.to_string().contains("seed"), "{err}");
        let ok = ScenarioConfig::parse(
            "scenario = \"ghz_sweep\"\n",
            "test",
            &Overrides {
                seed: Some(3),
                ..Overrides::default()
            },
        )
        .unwrap();
        assert_eq!(ok.seed, 3);
    }

    #[test]
    fn range_errors_carry_lines() {
        let err = parse("scenario = \"ghz_sweep\"\nseed = 1\nghz_coherence = 1.5\n").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        let err = parse("scenario = \"ghz_sweep\"\nseed = 1\nphi_rad = 1.0\n").unwrap_err();
        assert!(err.to_string().contains("does not apply"), "{err}");
        assert!(parse("scenario = \"ghz_sweep\"\nseed = 1\ndtheta_grid = [0.1, 0.2]\n").is_err());
        assert!(parse("scenario = \"ghz_sweep\"\nseed = = 1\n").is_err());
        assert!(parse("seed = 1\n").is_err());
    }

    #[test]
    fn ramsey_phi_default_time() {
        let cfg = ScenarioConfig::defaults(Scenario::RamseyQfiVsPhi, 1).unwrap();
        let ScenarioParams::RamseyPhi { ramsey, .. } = cfg.params else {
            panic!()
        };
        assert!((ramsey.time_us * ramsey.delta_rad_per_us - 1.5 * PI).abs() < 1e-12);
        assert!(ramsey.phi_grid_rad.contains(&FRAC_PI_2));
    }
}
