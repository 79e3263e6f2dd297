use serde_json::json;
use thiserror::Error;

use krein_pt::dynamics::DynamicsError;
use krein_pt::eigen::SolverError;
use krein_pt::krein::KreinError;
use krein_pt::observables::ObservableError;

use crate::config::ConfigError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    /// Input rejected before or during the computation: non-PT potentials,
    /// forbidden superpositions, too many states.
    #[error("{kind}: {message}")]
    Validation { kind: &'static str, message: String },
    /// The numerics did not deliver a usable result.
    #[error("{kind}: {message}")]
    Numerical { kind: &'static str, message: String },
    #[error("cannot write {path}: {message}")]
    Output { path: String, message: String },
}

impl CliError {
    pub fn validation(kind: &'static str, message: impl Into<String>) -> Self {
        CliError::Validation {
            kind,
            message: message.into(),
        }
    }

    pub fn numerical(kind: &'static str, message: impl Into<String>) -> Self {
        CliError::Numerical {
            kind,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Validation { .. } | CliError::Output { .. } => {
                EXIT_VALIDATION
            }
            CliError::Numerical { .. } => EXIT_NUMERICAL,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "ConfigError",
            CliError::Validation { kind, .. } | CliError::Numerical { kind, .. } => kind,
            CliError::Output { .. } => "OutputError",
        }
    }

    /// Single-line JSON object for the error stream.
    pub fn to_json(&self) -> String {
        let mut value = json!({
            "error": self.kind(),
            "message": self.to_string(),
            "exit_code": self.exit_code(),
        });
        if let CliError::Config(e) = self {
            value["key"] = json!(e.key);
            value["reason"] = json!(e.reason);
        }
        value.to_string()
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        let message = e.to_string();
        match e {
            SolverError::NotPTSymmetric(_) => CliError::validation("NotPTSymmetric", message),
            SolverError::Potential(_) => CliError::validation("PotentialNotFinite", message),
            SolverError::TooManyStates { .. } => CliError::validation("TooManyStates", message),
            SolverError::ConvergenceFailure { .. } => {
                CliError::numerical("ConvergenceFailure", message)
            }
            SolverError::NoConvergence { .. } => CliError::numerical("NoConvergence", message),
            SolverError::BasinEscape { .. } => CliError::numerical("BasinEscape", message),
            SolverError::NeutralEigenvector => CliError::numerical("NeutralEigenvector", message),
            SolverError::Krein(k) => k.into(),
        }
    }
}

impl From<KreinError> for CliError {
    fn from(e: KreinError) -> Self {
        CliError::numerical("KreinError", e.to_string())
    }
}

impl From<ObservableError> for CliError {
    fn from(e: ObservableError) -> Self {
        let kind = match e {
            ObservableError::ComplexEigenvalue(_) => "ComplexEigenvalue",
            ObservableError::NeutralState { .. } => "NeutralState",
            ObservableError::SizeMismatch { .. } => "SizeMismatch",
            ObservableError::Krein(_) => "KreinError",
        };
        CliError::numerical(kind, e.to_string())
    }
}

impl From<DynamicsError> for CliError {
    fn from(e: DynamicsError) -> Self {
        let message = e.to_string();
        match e {
            DynamicsError::SingularSolve { .. } => CliError::numerical("SingularSolve", message),
            DynamicsError::InvalidStep { .. } | DynamicsError::ZeroStride => {
                CliError::validation("InvalidStep", message)
            }
            DynamicsError::NonInvariantOperator(_) => {
                CliError::validation("NonInvariantOperator", message)
            }
            DynamicsError::TooShort(_) => CliError::validation("TrajectoryTooShort", message),
            DynamicsError::NonFinite { .. } => CliError::numerical("NonFinite", message),
            DynamicsError::Spectrum(_) => CliError::numerical("ConvergenceFailure", message),
            DynamicsError::Observable(o) => o.into(),
            DynamicsError::Krein(k) => k.into(),
        }
    }
}
