//! Configuration-driven runner for variational Bose-Hubbard scenarios:
//! single runs with an optional exact reference, convergence sweeps over
//! basis size and grid spacing, bundled presets and trajectory comparison.

pub mod compare;
pub mod config;
pub mod presets;
pub mod run;

pub use compare::{compare_files, compare_tables, CompareReport};
pub use config::{validate_config, validate_sweep, Initial, OracleMode, ScenarioConfig, SweepConfig};
pub use run::{run_scenario, run_sweep, RunReport, SweepReport};

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const VALIDATION: i32 = 1;
    pub const PROPAGATION: i32 = 2;
    pub const TOLERANCE: i32 = 3;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),
    #[error(transparent)]
    Model(#[from] bhgcs::Error),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => exit::VALIDATION,
            CliError::Model(e) => match e.root() {
                bhgcs::Error::InvalidParameter(_)
                | bhgcs::Error::BasisMismatch { .. }
                | bhgcs::Error::GridTooSmall { .. }
                | bhgcs::Error::DimensionOverflow { .. }
                | bhgcs::Error::PoolExhausted { .. } => exit::VALIDATION,
                _ => exit::PROPAGATION,
            },
            CliError::Io(_) => exit::PROPAGATION,
        }
    }
}
