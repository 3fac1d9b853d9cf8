//! Configurable end-to-end scenarios and their outputs.

pub mod config;
pub mod output;
pub mod runners;

pub use config::{validate_and_echo_config, Overrides, Scenario, ScenarioConfig};
pub use output::{audit, Audit, ResultRow, RunOutput, CSV_HEADER};
pub use runners::{estimate_from_records, run, RecordEstimate, RecordSummary, RECORD_CSV_HEADER};
