//! Emotion states and the row-stochastic transition matrices over them.

pub mod export;
mod matrix;
mod perturb;
mod priors;
mod state;

pub use matrix::{validate_rows, MatrixError, Rows, StochasticMatrix, Strategy, Violation, STRATEGY_LEN};
pub use perturb::{dirichlet_perturb, DEFAULT_CONCENTRATION, DEFAULT_SMOOTHING};
pub use priors::{psychological_priors, PRIOR_PERCENT};
pub use state::{EmotionState, UnknownEmotion, NUM_EMOTIONS};
