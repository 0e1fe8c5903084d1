use serde::{Deserialize, Serialize};

use super::SurrogateError;
use crate::scalar::Scalar;

/// Smoothness of the Matérn covariance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Smoothness {
    /// nu = 3/2, once differentiable sample paths.
    #[default]
    Matern32,
    /// nu = 5/2, twice differentiable sample paths.
    Matern52,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams<T> {
    pub signal_variance: T,
    pub length_scale: T,
    pub noise_variance: T,
    #[serde(default)]
    pub smoothness: Smoothness,
}

impl<T: Scalar> Default for KernelParams<T> {
    fn default() -> Self {
        Self {
            signal_variance: T::one(),
            length_scale: T::one(),
            noise_variance: T::lit(1e-6),
            smoothness: Smoothness::Matern32,
        }
    }
}

impl<T: Scalar> KernelParams<T> {
    pub fn validate(&self) -> Result<(), SurrogateError> {
        if !(self.signal_variance > T::zero() && self.signal_variance.is_finite()) {
            return Err(SurrogateError::Parameter(format!(
                "signal variance must be positive, got {}",
                self.signal_variance
            )));
        }
        if !(self.length_scale > T::zero() && self.length_scale.is_finite()) {
            return Err(SurrogateError::Parameter(format!("length scale must be positive, got {}", self.length_scale)));
        }
        if !(self.noise_variance >= T::zero() && self.noise_variance.is_finite()) {
            return Err(SurrogateError::Parameter(format!(
                "noise variance must be non-negative, got {}",
                self.noise_variance
            )));
        }
        Ok(())
    }

    /// Covariance as a function of Euclidean distance.
    pub fn covariance_at(&self, distance: T) -> T {
        let r = distance / self.length_scale;
        match self.smoothness {
            Smoothness::Matern32 => {
                let a = T::lit(3.0).sqrt() * r;
                self.signal_variance * (T::one() + a) * (-a).exp()
            }
            Smoothness::Matern52 => {
                let a = T::lit(5.0).sqrt() * r;
                self.signal_variance * (T::one() + a + a * a / T::lit(3.0)) * (-a).exp()
            }
        }
    }
}

pub(crate) fn euclidean<T: Scalar>(p: &[T], q: &[T]) -> T {
    p.iter().zip(q).map(|(&a, &b)| (a - b) * (a - b)).sum::<T>().sqrt()
}

/// Matérn covariance between two strategy vectors.
pub fn matern_kernel<T: Scalar>(p: &[T], q: &[T], params: &KernelParams<T>) -> Result<T, SurrogateError> {
    if p.len() != q.len() {
        return Err(SurrogateError::Dimension { expected: p.len(), found: q.len() });
    }
    Ok(params.covariance_at(euclidean(p, q)))
}
