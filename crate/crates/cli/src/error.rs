use std::fmt;

use hpa_dyn::chareq::AnalysisError;
use hpa_dyn::kernel::KernelError;
use hpa_dyn::model::ModelError;
use hpa_dyn::solver::SolverError;

/// Failure of a command, split by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad input: unreadable or malformed config, invalid values, unwritable output.
    Config(String),
    /// Valid input on which the numerics failed.
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(format!("output: {e}"))
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::EmptyBracket { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<KernelError> for CliError {
    fn from(e: KernelError) -> Self {
        match e {
            KernelError::Invalid(_) => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::InvalidArgument(_) => CliError::Config(e.to_string()),
            AnalysisError::Kernel(k) => k.into(),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::Model(m) => m.into(),
            SolverError::Kernel(k) => k.into(),
            SolverError::StepTooLarge { .. }
            | SolverError::DelayNotGridAligned { .. }
            | SolverError::UnsupportedKernels(_)
            | SolverError::InvalidConfig(_)
            | SolverError::TooShort(_) => CliError::Config(e.to_string()),
            SolverError::NonFiniteState { .. } | SolverError::BracketInvalid { .. } => {
                CliError::Numerical(e.to_string())
            }
        }
    }
}
