use thiserror::Error;

/// Errors raised by the simulator and the Monte Carlo estimators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("collocation grid of {got} points is too small, need at least {need}")]
    GridTooSmall { got: usize, need: usize },

    #[error("truncation N = {n_cut} exceeds the ambient truncation M = {m_ambient}")]
    TruncationExceedsAmbient { n_cut: usize, m_ambient: usize },

    #[error("state became non-finite{}", .context.as_deref().map(|c| format!(" ({c})")).unwrap_or_default())]
    NonFiniteState { context: Option<String> },

    #[error("|t| = {t} exceeds the contraction time {t_max}")]
    ContractionRadiusExceeded { t: f64, t_max: f64 },

    #[error("growth monitor bound violated: {0}")]
    BoundViolated(String),

    #[error("cutoff radius R is required but absent")]
    MissingCutoff,

    #[error("log-weight {0} overflows exp()")]
    WeightOverflow(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("snapshot format: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
