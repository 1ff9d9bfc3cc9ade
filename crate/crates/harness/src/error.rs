use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] lbm4::Error),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("malformed preset: {0}")]
    Toml(#[from] toml::de::Error),

    #[error("exact solution unavailable: {0}")]
    Exact(String),

    #[error("non-finite field in {run} after macro-step {step}")]
    Instability { run: String, step: usize },

    #[error("entropy solver fell back on {rate:.3e} of sites (threshold {threshold:.1e})")]
    SolverFailureRate { rate: f64, threshold: f64 },
}

pub type Result<T> = std::result::Result<T, HarnessError>;

impl HarnessError {
    /// Process exit code of the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Instability { .. } | HarnessError::Core(lbm4::Error::Instability { .. }) => 2,
            HarnessError::SolverFailureRate { .. } | HarnessError::Core(lbm4::Error::RootFinding(_)) => 4,
            HarnessError::Io(_) | HarnessError::Csv(_) => 1,
            _ => 3,
        }
    }
}
