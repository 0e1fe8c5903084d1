use rand::Rng;
use rand_distr::{Distribution, Gamma};

use super::matrix::{MatrixError, Rows, StochasticMatrix};
use super::state::NUM_EMOTIONS;
use crate::scalar::Scalar;

pub const DEFAULT_CONCENTRATION: f64 = 10.0;
pub const DEFAULT_SMOOTHING: f64 = 0.1;

const MAX_ROW_ATTEMPTS: usize = 64;

/// Resamples every row from `Dirichlet(concentration * row + smoothing)`.
///
/// Rows are drawn as normalized independent unit-scale Gamma variates, so the
/// result is row-stochastic by construction and every entry is strictly positive.
pub fn dirichlet_perturb<T: Scalar, R: Rng + ?Sized>(
    matrix: &StochasticMatrix<T>,
    concentration: f64,
    smoothing: f64,
    rng: &mut R,
) -> Result<StochasticMatrix<T>, MatrixError> {
    if !(concentration > 0.0 && concentration.is_finite()) {
        return Err(MatrixError::Parameter(format!("concentration must be positive, got {concentration}")));
    }
    if !(smoothing > 0.0 && smoothing.is_finite()) {
        return Err(MatrixError::Parameter(format!("smoothing must be positive, got {smoothing}")));
    }

    let mut rows: Rows<T> = [[T::zero(); NUM_EMOTIONS]; NUM_EMOTIONS];
    for (out, src) in rows.iter_mut().zip(matrix.rows()) {
        let gammas: Vec<Gamma<f64>> = src
            .iter()
            .map(|&p| Gamma::new(concentration * p.as_f64() + smoothing, 1.0))
            .collect::<Result<_, _>>()
            .map_err(|e| MatrixError::Parameter(e.to_string()))?;
        *out = sample_row::<T, R>(&gammas, rng)?;
    }
    StochasticMatrix::from_rows(rows)
}

fn sample_row<T: Scalar, R: Rng + ?Sized>(
    gammas: &[Gamma<f64>],
    rng: &mut R,
) -> Result<[T; NUM_EMOTIONS], MatrixError> {
    // Tiny shapes can underflow to zero, more often once narrowed to f32.
    for _ in 0..MAX_ROW_ATTEMPTS {
        let mut draws = [0.0f64; NUM_EMOTIONS];
        for (d, g) in draws.iter_mut().zip(gammas) {
            *d = g.sample(rng);
        }
        let total: f64 = draws.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            continue;
        }
        let mut row = [T::zero(); NUM_EMOTIONS];
        for (r, d) in row.iter_mut().zip(draws) {
            *r = T::lit(d / total);
        }
        if row.iter().all(|&p| p > T::zero()) {
            return Ok(row);
        }
    }
    Err(MatrixError::Parameter("Dirichlet row underflowed repeatedly".into()))
}
