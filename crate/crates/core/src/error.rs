use thiserror::Error;

/// Errors surfaced by the optimization and testbed primitives.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Input dimensions disagree with the configured parameter space.
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// Kernel matrix factorization failed even after the jitter ladder.
    #[error("kernel matrix is numerically degenerate (max jitter attempted: {max_jitter:e})")]
    NumericallyDegenerate { max_jitter: f64 },

    /// A configuration value is out of range or inconsistent.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// An argument violates a documented precondition.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The rollout budget is already exhausted.
    #[error("budget exhausted: spent {spent} of {budget} rollouts")]
    BudgetExhausted { spent: usize, budget: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
