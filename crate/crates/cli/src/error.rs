use crlab_core::calculus::CalculusError;
use crlab_core::convexify::ConvexifyError;
use crlab_core::domain::DomainError;
use crlab_core::kernels::KernelError;
use crlab_core::seeley::SeeleyError;
use crlab_core::solvers::SolverError;
use thiserror::Error;

/// Anything that should abort the command with exit code 2 (as opposed to
/// failing report rows, which exit with 1).
#[derive(Debug, Error)]
pub enum CliError {
    /// Config file problems, always annotated with the offending path.
    #[error("{path}: {message}")]
    Config { path: String, message: String },
    /// Bad command-line arguments beyond what clap can check.
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Convexify(#[from] ConvexifyError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Seeley(#[from] SeeleyError),
    #[error(transparent)]
    Calculus(#[from] CalculusError),
}

impl CliError {
    pub fn config(path: &std::path::Path, message: impl Into<String>) -> Self {
        CliError::Config {
            path: path.display().to_string(),
            message: message.into(),
        }
    }
}
