use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A facet, source, or linguistic term could not be resolved.
    #[error("taxonomy error: {0}")]
    Taxonomy(String),

    /// Numeric input outside what an operation accepts (NaN, infinity, bad parameters).
    #[error("invalid input: {0}")]
    Input(String),

    /// No fuzzy rule fired, or the aggregated output set has zero area.
    #[error("empty inference: no rule fired with positive strength")]
    EmptyInference,

    #[error("insufficient data: need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    /// A caller broke an operation's precondition (size mismatch, self-evaluation, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("no evidence available")]
    NoEvidence,

    #[error("routing error: {0}")]
    Routing(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}
