//! Command errors and their exit codes.

use kinetic_interface::forms::FormError;
use kinetic_interface::kinetic_mc::KineticError;
use kinetic_interface::levy_limit::LevyError;
use kinetic_interface::model::{ModelError, ValidationReport};
use kinetic_interface::solver::SolverError;
use kinetic_interface::stats::StatsError;
use thiserror::Error;

use crate::config::ConfigError;

/// Exit code of a successful run.
pub const EXIT_OK: i32 = 0;
/// Exit code of any other runtime failure (I/O, non-converged numerics).
pub const EXIT_FAILURE: i32 = 1;
/// Exit code of a configuration, argument or model validation failure.
pub const EXIT_VALIDATION: i32 = 2;
/// Exit code of an exhausted path or step budget.
pub const EXIT_BUDGET: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("model: {0}")]
    Validation(ValidationReport),
    #[error("argument: {0}")]
    Argument(String),
    #[error("budget exhausted: {0}")]
    Budget(String),
    #[error("computation failed: {0}")]
    Compute(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Validation(_) | CliError::Argument(_) => EXIT_VALIDATION,
            CliError::Budget(_) => EXIT_BUDGET,
            CliError::Compute(_) | CliError::Io(_) => EXIT_FAILURE,
        }
    }
}

impl From<ValidationReport> for CliError {
    fn from(r: ValidationReport) -> Self {
        CliError::Validation(r)
    }
}

impl From<KineticError> for CliError {
    fn from(e: KineticError) -> Self {
        match e {
            KineticError::PathBudgetExceeded { .. } => CliError::Budget(e.to_string()),
            KineticError::ZeroStart => CliError::Argument(e.to_string()),
        }
    }
}

impl From<LevyError> for CliError {
    fn from(e: LevyError) -> Self {
        match e {
            LevyError::PathBudgetExceeded { .. } | LevyError::StepResolutionTooCoarse { .. } => {
                CliError::Budget(e.to_string())
            }
            LevyError::ZeroStart | LevyError::InvalidTimes | LevyError::InvalidConfig | LevyError::EmptySupport => {
                CliError::Argument(e.to_string())
            }
            LevyError::RateEnvelopeViolation { .. } | LevyError::Quadrature(_) => CliError::Compute(e.to_string()),
        }
    }
}

impl From<FormError> for CliError {
    fn from(e: FormError) -> Self {
        match e {
            FormError::GridMismatch
            | FormError::InterfaceNotOnGrid
            | FormError::TooFewNodes
            | FormError::InvalidExponent { .. }
            | FormError::InvalidProbabilities { .. } => CliError::Argument(e.to_string()),
            _ => CliError::Compute(e.to_string()),
        }
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::Levy(e) => e.into(),
            SolverError::Kinetic(e) => e.into(),
            SolverError::Form(e) => e.into(),
            SolverError::Stats(e) => e.into(),
            SolverError::GridMismatch | SolverError::InconsistentInitialData(_) | SolverError::InvalidTimes => {
                CliError::Argument(e.to_string())
            }
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Compute(e.to_string())
    }
}

impl From<StatsError> for CliError {
    fn from(e: StatsError) -> Self {
        CliError::Compute(e.to_string())
    }
}
