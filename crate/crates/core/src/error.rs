use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("lattice mismatch: {0}")]
    LatticeMismatch(String),

    #[error("shift of {offset} cells exceeds extent {extent} on axis {axis}")]
    ShiftTooLarge { axis: usize, offset: i64, extent: usize },

    #[error("inadmissible state: {0}")]
    Inadmissible(String),

    #[error("sub-characteristic condition violated for velocity {velocity}")]
    NonConvex { velocity: usize },

    #[error("no admissible conjugate root: {0}")]
    NoConjugateRoot(String),

    #[error("non-finite value after macro-step {step}")]
    Instability { step: usize },

    #[error("root finding failed: {0}")]
    RootFinding(String),

    #[error("fit failed: {0}")]
    Fit(String),
}

pub type Result<T> = std::result::Result<T, Error>;
