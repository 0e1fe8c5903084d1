//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use emotune::emotion::{dirichlet_perturb, psychological_priors, NUM_EMOTIONS};
use emotune::negotiation::{EpisodeConfig, NegotiationEngine, ScriptedAgents};
use emotune::surrogate::{KernelParams, Smoothness};
use emotune::TransitionMatrix;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

pub const DIM: usize = NUM_EMOTIONS * NUM_EMOTIONS;

pub fn scripted_engine(seed: u64) -> NegotiationEngine {
    NegotiationEngine::scripted(ScriptedAgents::new(Default::default(), 1), EpisodeConfig::default(), seed)
}

/// Matérn covariance written out from the textbook form.
pub fn matern(p: &[f64], q: &[f64], params: &KernelParams<f64>) -> f64 {
    let d = p.iter().zip(q).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt() / params.length_scale;
    match params.smoothness {
        Smoothness::Matern32 => {
            let a = 3f64.sqrt() * d;
            params.signal_variance * (1.0 + a) * (-a).exp()
        }
        Smoothness::Matern52 => {
            let a = 5f64.sqrt() * d;
            params.signal_variance * (1.0 + a + a * a / 3.0) * (-a).exp()
        }
    }
}

/// Posterior mean and variance in reward units via dense LU solves.
pub fn gp_oracle(
    inputs: &[Vec<f64>],
    rewards: &[f64],
    params: &KernelParams<f64>,
    jitter: f64,
    query: &[f64],
) -> (f64, f64) {
    let n = inputs.len();
    let mu = rewards.iter().sum::<f64>() / n as f64;
    let sd = (rewards.iter().map(|r| (r - mu).powi(2)).sum::<f64>() / n as f64).sqrt();
    let scale = if sd > 1e-12 { sd } else { 1.0 };
    let y = DVector::from_iterator(n, rewards.iter().map(|r| (r - mu) / scale));
    let k = DMatrix::from_fn(n, n, |i, j| {
        matern(&inputs[i], &inputs[j], params) + if i == j { params.noise_variance + jitter } else { 0.0 }
    });
    let ks = DVector::from_iterator(n, inputs.iter().map(|x| matern(x, query, params)));
    let lu = k.lu();
    let alpha = lu.solve(&y).expect("oracle gram is invertible");
    let v = lu.solve(&ks).expect("oracle gram is invertible");
    let mean = ks.dot(&alpha);
    let var = (params.signal_variance - ks.dot(&v)).max(0.0);
    (mu + scale * mean, scale * scale * var)
}

/// Stratified Monte Carlo estimate of `E[max(f - best - xi, 0)]`, `f ~ N(mean, std^2)`.
pub fn ei_monte_carlo(mean: f64, std: f64, best: f64, xi: f64, samples: usize, rng: &mut ChaCha8Rng) -> f64 {
    let normal = Normal::new(mean, std).expect("valid normal");
    let mut total = 0.0;
    for i in 0..samples {
        let u = (i as f64 + rng.random::<f64>()) / samples as f64;
        let f = normal.inverse_cdf(u.clamp(1e-300, 1.0 - 1e-16));
        total += (f - best - xi).max(0.0);
    }
    total / samples as f64
}

pub fn random_point(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let m: TransitionMatrix = dirichlet_perturb(&psychological_priors(), 2.0, 0.1, rng).unwrap();
    m.flatten().into_inner()
}

/// Mean row entropy by explicit double loop.
pub fn entropy_oracle(m: &TransitionMatrix) -> f64 {
    let mut h = 0.0;
    for i in 0..NUM_EMOTIONS {
        let mut row = 0.0;
        for j in 0..NUM_EMOTIONS {
            let p = m.rows()[i][j];
            if p > 0.0 {
                row -= p * p.ln();
            }
        }
        h += row;
    }
    h / NUM_EMOTIONS as f64
}

/// Row-stochastic within `tol` with non-negative entries.
pub fn is_stochastic(m: &TransitionMatrix, tol: f64) -> bool {
    m.rows().iter().all(|r| r.iter().all(|&p| p >= 0.0 && p.is_finite()) && (r.iter().sum::<f64>() - 1.0).abs() <= tol)
}
