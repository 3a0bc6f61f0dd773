use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A criterion was called with a spectrum it does not cover.
    #[error("criterion does not apply: {0}")]
    WrongCase(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// The decisive function vanished before the requested time.
    #[error("decisive function vanishes at t = {t_star} before the requested time")]
    BlowupCrossed { t_star: f64 },

    #[error("point lies on the singular line {0}")]
    SingularLocus(&'static str),

    #[error("negative radicand: point is outside the simple-wave branch")]
    OutsideBranch,

    #[error("denominator vanishes: gradient singularity")]
    GradientSingularity,

    #[error("unsupported specialization: {0}")]
    Unsupported(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
