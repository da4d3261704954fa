//! Scenario configuration, presets, the `rsf` commands and their CSV/JSON
//! outputs.

mod commands;
mod config;
mod output;
mod presets;

use thiserror::Error;

pub use config::{
    initial_data, parse_config, FrictionSpec, InitialSpec, MeshSpec, OutputSpec, Scenario, ScenarioConfig, VerifySpec,
};
pub use commands::{
    ageing_order_errors, assess_study, cmd_contract_study, cmd_run, cmd_verify, perturbed_state, random_tests, CheckResult,
    CommandError, RunOutputs, Suite, VerifyReport, EXIT_FAILURE, EXIT_FIXED_POINT, EXIT_IO, EXIT_OK, EXIT_RATE, EXIT_STATE,
};
pub use output::{
    write_contact_csv, write_json, write_reports, write_state_csv, write_trajectory_csv, CONTACT_HEADER, STATE_HEADER,
    TRAJECTORY_HEADER,
};
pub use presets::{preset, single_dof, slab_driven, stick, PRESET_NAMES};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Parse(String),
    #[error("config key `{key}`: {reason}")]
    Config { key: String, reason: String },
    #[error("io: {0}")]
    Io(String),
}
