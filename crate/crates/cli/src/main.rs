//! `qfi`: runs the randomized-measurement QFI scenarios and writes plot-ready
//! results.

use std::fs::{self, File};
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qfi_core::experiments::{self, Overrides, Scenario, ScenarioConfig};
use qfi_core::randmeas::{read_records, Bootstrap, MixednessRule, SeedStream};
use qfi_core::Error;

#[derive(Parser)]
#[command(name = "qfi", version, about = "Quantum Fisher information from randomized measurements")]
struct Cli {
    /// Scenario config file (flat TOML, see README).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides the config value.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; defaults to the config's output_path, else stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Fitted QFI and purity of a decaying Ramsey state versus time.
    RamseyTime,
    /// Fitted QFI and coherence versus preparation angle.
    RamseyPhi,
    /// D_G sweep and fitted sub-QFI of a GHZ state.
    GhzSweep,
    /// Measurement budget versus qubit count, with exponential fits.
    Scaling,
    /// Sub-QFI of an 8-qubit GHZ state under Ising dynamics over time.
    TimeEvolution,
    /// Estimators applied to an externally produced record file.
    EstimateFromRecords {
        /// Line-delimited JSON records.
        records: PathBuf,
        #[arg(long, default_value_t = Bootstrap::DEFAULT_RESAMPLES)]
        bootstrap_resamples: usize,
        #[arg(long, value_enum, default_value_t = Mixedness::Signed)]
        mixedness: Mixedness,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mixedness {
    Signed,
    Truncated,
}

/// Exit codes by failure class.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::RecordFormat { .. } => 2,
        Error::Io(_) => 4,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn execute(cli: &Cli) -> qfi_core::Result<ExitCode> {
    let scenario = match &cli.command {
        Command::RamseyTime => Scenario::RamseyQfiVsTime,
        Command::RamseyPhi => Scenario::RamseyQfiVsPhi,
        Command::GhzSweep => Scenario::GhzSweep,
        Command::Scaling => Scenario::ManybodyScaling,
        Command::TimeEvolution => Scenario::ManybodyTimeEvolution,
        Command::EstimateFromRecords {
            records,
            bootstrap_resamples,
            mixedness,
        } => return records_command(cli, records, *bootstrap_resamples, *mixedness),
    };
    let overrides = Overrides {
        scenario: Some(scenario),
        seed: cli.seed,
        output_path: cli.out.clone(),
    };
    let cfg = match &cli.config {
        Some(path) => ScenarioConfig::load(path, &overrides)?,
        None => ScenarioConfig::parse("", "command line", &overrides)?,
    };
    eprintln!("# resolved config\n{}", cfg.echo());
    let output = experiments::run(&cfg)?;
    let body = match cli.format {
        Format::Csv => output.csv(),
        Format::Json => output.full_json() + "\n",
    };
    match &cfg.output_path {
        Some(path) => {
            write_file(path, &body)?;
            if cli.format == Format::Csv {
                write_file(&summary_path(path), &(output.summary_json() + "\n"))?;
            }
        }
        None => {
            io::stdout().write_all(body.as_bytes())?;
            if cli.format == Format::Csv {
                eprintln!("{}", output.summary_json());
            }
        }
    }
    for note in &output.notes {
        eprintln!("note: {note}");
    }
    let audit = output.audit();
    if !audit.passed {
        eprintln!(
            "audit failed: {}/{} rows within {}σ of the oracle (required fraction {})",
            audit.within, audit.rows, audit.sigma_multiple, audit.required_fraction
        );
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn records_command(cli: &Cli, path: &Path, resamples: usize, mixedness: Mixedness) -> qfi_core::Result<ExitCode> {
    if cli.config.is_some() {
        return Err(Error::Config("estimate-from-records takes no config file".into()));
    }
    let records = read_records(BufReader::new(File::open(path)?))?;
    let rule = match mixedness {
        Mixedness::Signed => MixednessRule::Signed,
        Mixedness::Truncated => MixednessRule::Truncated,
    };
    let bootstrap = Bootstrap::new(resamples, SeedStream::new(cli.seed.unwrap_or(0)));
    let summary = experiments::estimate_from_records(&records, rule, &bootstrap)?;
    let body = match cli.format {
        Format::Csv => summary.csv(),
        Format::Json => summary.json() + "\n",
    };
    match &cli.out {
        Some(p) => write_file(p, &body)?,
        None => io::stdout().write_all(body.as_bytes())?,
    }
    Ok(ExitCode::SUCCESS)
}

fn summary_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".summary.json");
    PathBuf::from(name)
}

fn write_file(path: &Path, body: &str) -> qfi_core::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, body)?;
    Ok(())
}
