use thiserror::Error;

/// Errors raised by the library. The CLI maps these onto process exit codes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("probability at index {index} is negative ({value})")]
    NegativeProbability { index: usize, value: f64 },
    #[error("probability at index {index} is not finite")]
    NonFiniteProbability { index: usize },
    #[error("probabilities sum to {sum}, which is not within 1e-9 of 1")]
    NotNormalized { sum: f64 },
    #[error("probability at index {index} is zero")]
    ZeroProbability { index: usize },
    #[error("need at least two symbols, got {0}")]
    TooFewSymbols(usize),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("labels length {labels} does not match {probs} probabilities")]
    LabelMismatch { labels: usize, probs: usize },
    #[error("nu puts mass on index {index} where the reference distribution is zero")]
    AbsoluteContinuityViolation { index: usize },
    #[error("argument out of domain: {0}")]
    DomainError(String),
    #[error("arity must be at least 2, got {0}")]
    ArityTooSmall(u32),
    #[error("weight at index {index} is not a finite non-negative number")]
    NonFiniteWeight { index: usize },
    #[error("all weights are zero")]
    AllZeroWeights,
    #[error("invalid code length at index {index}: {value}")]
    InvalidLength { index: usize, value: f64 },
    #[error("Kraft sum {0} exceeds 1")]
    KraftViolation(f64),
    #[error("codeword lengths are not integers")]
    NotInteger,
    #[error("m = {m} saturates the ball of radius {radius} (m >= exp(-radius))")]
    SaturatedInput { m: f64, radius: f64 },
    #[error("radius {radius} is at or beyond the existence threshold {threshold}")]
    BoundaryRegime { radius: f64, threshold: f64 },
    #[error("no convergence after {0} iterations")]
    NoConvergence(usize),
    #[error("enumeration limit exceeded: {0}")]
    LimitExceeded(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
