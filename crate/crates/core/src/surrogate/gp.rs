use super::kernel::{euclidean, KernelParams};
use super::SurrogateError;
use crate::emotion::Strategy;
use crate::scalar::{normal_cdf, normal_pdf, Scalar};

/// First diagonal jitter tried after an unperturbed factorization fails.
pub const MIN_JITTER: f64 = 1e-10;
/// Largest diagonal jitter before the fit is declared failed.
pub const MAX_JITTER: f64 = 1e-6;

/// One evaluated strategy.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation<T> {
    pub strategy: Strategy<T>,
    pub reward: T,
}

/// Lower-triangular Cholesky factor, row-major.
#[derive(Debug, Clone)]
struct Cholesky<T> {
    n: usize,
    lower: Vec<T>,
}

impl<T: Scalar> Cholesky<T> {
    fn factor(matrix: &[T], n: usize) -> Option<Self> {
        let mut lower = vec![T::zero(); n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut sum = matrix[i * n + j];
                for k in 0..j {
                    sum = sum - lower[i * n + k] * lower[j * n + k];
                }
                if i == j {
                    if sum <= T::zero() || !sum.is_finite() {
                        return None;
                    }
                    lower[i * n + i] = sum.sqrt();
                } else {
                    lower[i * n + j] = sum / lower[j * n + j];
                }
            }
        }
        Some(Self { n, lower })
    }

    /// Solves `L x = b`.
    fn forward(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        let mut x = b.to_vec();
        for i in 0..n {
            let row = &self.lower[i * n..i * n + i];
            let sum = row.iter().zip(&x[..i]).fold(x[i], |s, (&l, &v)| s - l * v);
            x[i] = sum / self.lower[i * n + i];
        }
        x
    }

    /// Solves `L^T x = b`.
    fn backward(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        let mut x = b.to_vec();
        for i in (0..n).rev() {
            let sum = x.iter().enumerate().skip(i + 1).fold(x[i], |s, (k, &v)| s - self.lower[k * n + i] * v);
            x[i] = sum / self.lower[i * n + i];
        }
        x
    }
}

/// Exact GP regression with fixed hyperparameters on standardized rewards.
#[derive(Debug, Clone)]
pub struct GaussianProcess<T> {
    params: KernelParams<T>,
    inputs: Vec<Vec<T>>,
    rewards: Vec<T>,
    factor: Cholesky<T>,
    weights: Vec<T>,
    reward_mean: T,
    reward_scale: T,
    jitter: T,
}

impl<T: Scalar> GaussianProcess<T> {
    pub fn fit(observations: &[Observation<T>], params: KernelParams<T>) -> Result<Self, SurrogateError> {
        let inputs: Vec<&[T]> = observations.iter().map(|o| o.strategy.as_slice()).collect();
        let rewards: Vec<T> = observations.iter().map(|o| o.reward).collect();
        Self::fit_raw(&inputs, &rewards, params)
    }

    /// Fits on raw coordinate slices; all must share one dimension.
    pub fn fit_raw(inputs: &[&[T]], rewards: &[T], params: KernelParams<T>) -> Result<Self, SurrogateError> {
        params.validate()?;
        if inputs.is_empty() {
            return Err(SurrogateError::Empty);
        }
        if inputs.len() != rewards.len() {
            return Err(SurrogateError::Dimension { expected: inputs.len(), found: rewards.len() });
        }
        let dim = inputs[0].len();
        if let Some(bad) = inputs.iter().find(|x| x.len() != dim) {
            return Err(SurrogateError::Dimension { expected: dim, found: bad.len() });
        }
        if let Some(r) = rewards.iter().find(|r| !r.is_finite()) {
            return Err(SurrogateError::Parameter(format!("non-finite reward {r}")));
        }

        let n = inputs.len();
        let count = T::lit(n as f64);
        let reward_mean = rewards.iter().copied().sum::<T>() / count;
        let variance = rewards.iter().map(|&r| (r - reward_mean) * (r - reward_mean)).sum::<T>() / count;
        let reward_scale = if variance.sqrt() > T::lit(1e-12) { variance.sqrt() } else { T::one() };
        let standardized: Vec<T> = rewards.iter().map(|&r| (r - reward_mean) / reward_scale).collect();

        let mut gram = vec![T::zero(); n * n];
        for i in 0..n {
            for j in 0..=i {
                let k = params.covariance_at(euclidean(inputs[i], inputs[j]));
                gram[i * n + j] = k;
                gram[j * n + i] = k;
            }
            gram[i * n + i] = gram[i * n + i] + params.noise_variance;
        }

        let (factor, jitter) = factor_with_jitter(&mut gram, n)?;
        let weights = factor.backward(&factor.forward(&standardized));

        Ok(Self {
            params,
            inputs: inputs.iter().map(|x| x.to_vec()).collect(),
            rewards: rewards.to_vec(),
            factor,
            weights,
            reward_mean,
            reward_scale,
            jitter,
        })
    }

    pub fn params(&self) -> &KernelParams<T> {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn rewards(&self) -> &[T] {
        &self.rewards
    }

    /// Diagonal jitter added on top of the noise variance (zero when none was needed).
    pub fn jitter(&self) -> T {
        self.jitter
    }

    /// Mean subtracted from rewards before fitting.
    pub fn reward_mean(&self) -> T {
        self.reward_mean
    }

    /// Scale rewards were divided by before fitting.
    pub fn reward_scale(&self) -> T {
        self.reward_scale
    }

    /// Predictive mean and standard deviation of the latent reward, in reward units.
    pub fn predict(&self, point: &[T]) -> (T, T) {
        let (mean, var) = self.predict_standardized(point);
        (self.reward_mean + self.reward_scale * mean, self.reward_scale * var.sqrt())
    }

    /// Predictive mean and variance before de-standardization.
    pub fn predict_standardized(&self, point: &[T]) -> (T, T) {
        let cross: Vec<T> = self.inputs.iter().map(|x| self.params.covariance_at(euclidean(x, point))).collect();
        let mean = cross.iter().zip(&self.weights).map(|(&k, &w)| k * w).sum::<T>();
        let v = self.factor.forward(&cross);
        let reduction = v.iter().map(|&x| x * x).sum::<T>();
        let var = (self.params.signal_variance - reduction).max(T::zero());
        (mean, var)
    }

    pub fn expected_improvement(&self, point: &[T], best_reward: T, xi: T) -> T {
        let (mean, std) = self.predict(point);
        expected_improvement_from_moments(mean, std, best_reward, xi)
    }
}

fn factor_with_jitter<T: Scalar>(gram: &mut [T], n: usize) -> Result<(Cholesky<T>, T), SurrogateError> {
    if let Some(f) = Cholesky::factor(gram, n) {
        return Ok((f, T::zero()));
    }
    let mut jitter = MIN_JITTER;
    let mut applied = T::zero();
    while jitter <= MAX_JITTER * (1.0 + 1e-9) {
        let step = T::lit(jitter) - applied;
        for i in 0..n {
            gram[i * n + i] = gram[i * n + i] + step;
        }
        applied = T::lit(jitter);
        if let Some(f) = Cholesky::factor(gram, n) {
            log::debug!("gram matrix factorized with jitter {jitter:e}");
            return Ok((f, applied));
        }
        jitter *= 10.0;
    }
    Err(SurrogateError::NotPositiveDefinite { max_jitter: MAX_JITTER })
}

/// Closed-form EI for a normal predictive with the given moments.
pub fn expected_improvement_from_moments<T: Scalar>(mean: T, std: T, best_reward: T, xi: T) -> T {
    let improvement = mean - best_reward - xi;
    if std <= T::zero() {
        return improvement.max(T::zero());
    }
    let z = improvement / std;
    (improvement * normal_cdf(z) + std * normal_pdf(z)).max(T::zero())
}
