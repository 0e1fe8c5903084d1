//! Gaussian-process surrogate over flattened strategies and the Expected Improvement score.

mod gp;
mod kernel;

pub use gp::{expected_improvement_from_moments, GaussianProcess, Observation, MAX_JITTER, MIN_JITTER};
pub use kernel::{matern_kernel, KernelParams, Smoothness};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SurrogateError {
    #[error("no observations to fit")]
    Empty,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("invalid kernel parameter: {0}")]
    Parameter(String),
    #[error("gram matrix not positive definite even with jitter {max_jitter:e}")]
    NotPositiveDefinite { max_jitter: f64 },
}
