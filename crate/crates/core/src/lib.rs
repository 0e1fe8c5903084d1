//! Bayesian optimization of creditor emotion-transition policies for
//! simulated debt-collection negotiations.
//!
//! The numeric core ([`emotion`], [`surrogate`]) is generic over the scalar
//! type; the aliases below fix it to `f64`, which the negotiation and
//! optimizer layers use throughout.

pub mod emotion;
pub mod negotiation;
pub mod optimizer;
pub mod prompt;
pub mod scalar;
pub mod scenarios;
pub mod seed;
pub mod surrogate;

pub use scalar::Scalar;

/// Row-stochastic 7x7 policy over creditor emotions.
pub type TransitionMatrix = emotion::StochasticMatrix<f64>;
/// Row-major flattening of a [`TransitionMatrix`].
pub type StrategyVector = emotion::Strategy<f64>;
pub type SurrogateModel = surrogate::GaussianProcess<f64>;
pub type Observation = surrogate::Observation<f64>;
