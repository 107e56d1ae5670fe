//! Crate-wide error type.

use thiserror::Error;

/// Everything that can go wrong inside the solver core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("initial datum is numerically zero after mean subtraction")]
    ZeroDatum,
    #[error("field contains a non-finite sample")]
    NonFinite,
    #[error("size mismatch: field has {got} entries, domain expects {expected}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("pointwise nonlinearity overflowed the floating-point range")]
    Overflow,
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("invalid stepper configuration: {0}")]
    ConfigInvalid(String),
    #[error("blow-up tail too short or not growing; cannot fit a blow-up time")]
    InsufficientTail,
    #[error("trajectory holds no samples")]
    EmptyTrajectory,
    #[error("need at least {needed} samples, trajectory has {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("epsilon {epsilon} outside the admissible interval (0, {upper})")]
    EpsilonOutOfRange { epsilon: f64, upper: f64 },
    #[error("operation undefined for the zero field")]
    ZeroField,
    #[error("alpha {alpha} does not exceed the well depth {d_hat}")]
    AlphaBelowDepth { alpha: f64, d_hat: f64 },
    #[error("banded linear solve failed: {0}")]
    LinearSolveFailure(String),
    #[error("trajectory carries no state checkpoints")]
    NoCheckpoints,
    #[error("trajectories do not overlap in time")]
    DisjointRanges,
    #[error("invalid initial-datum descriptor: {0}")]
    InvalidDescriptor(String),
}

pub type Result<T> = std::result::Result<T, Error>;
