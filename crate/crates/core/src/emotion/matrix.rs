use std::fmt;

use rand::Rng;

use super::state::{EmotionState, NUM_EMOTIONS};
use crate::scalar::Scalar;

/// Length of a flattened transition matrix.
pub const STRATEGY_LEN: usize = NUM_EMOTIONS * NUM_EMOTIONS;

pub type Rows<T> = [[T; NUM_EMOTIONS]; NUM_EMOTIONS];

/// Something wrong with one row of a candidate transition matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// The row does not sum to one; `residual` is `sum - 1`.
    RowSum { row: usize, sum: f64, residual: f64 },
    /// An entry is negative, above one, or not finite.
    Entry { row: usize, col: usize, value: f64 },
}

impl Violation {
    pub fn row(&self) -> usize {
        match self {
            Violation::RowSum { row, .. } | Violation::Entry { row, .. } => *row,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::RowSum { row, sum, residual } => {
                write!(f, "row {row} ({}) sums to {sum} (residual {residual:+e})", label(*row))
            }
            Violation::Entry { row, col, value } => {
                write!(f, "row {row} ({}) column {col} holds {value}", label(*row))
            }
        }
    }
}

fn label(row: usize) -> &'static str {
    EmotionState::from_index(row).map_or("?", EmotionState::label)
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MatrixError {
    #[error("matrix is not row-stochastic: {}", join(.0))]
    NotStochastic(Vec<Violation>),
    #[error("expected {expected} values, found {found}")]
    Length { expected: usize, found: usize },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("malformed matrix document: {0}")]
    Format(String),
}

fn join(violations: &[Violation]) -> String {
    violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// Checks row-stochasticity, reporting every offending row.
pub fn validate_rows<T: Scalar>(rows: &Rows<T>) -> Result<(), Vec<Violation>> {
    let mut violations = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        let mut sum = 0.0;
        for (j, &v) in row.iter().enumerate() {
            let v = v.as_f64();
            if !(0.0..=1.0).contains(&v) {
                violations.push(Violation::Entry { row: i, col: j, value: v });
            }
            sum += v;
        }
        let residual = sum - 1.0;
        if !residual.is_finite() || residual.abs() > T::ROW_SUM_TOLERANCE {
            violations.push(Violation::RowSum { row: i, sum, residual });
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

/// A validated 7x7 row-stochastic matrix over creditor emotions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StochasticMatrix<T> {
    rows: Rows<T>,
}

impl<T: Scalar> StochasticMatrix<T> {
    pub fn from_rows(rows: Rows<T>) -> Result<Self, MatrixError> {
        validate_rows(&rows).map_err(MatrixError::NotStochastic)?;
        Ok(Self { rows })
    }

    /// Every row equal to `1/7`.
    pub fn uniform() -> Self {
        let p = T::one() / T::lit(NUM_EMOTIONS as f64);
        Self { rows: [[p; NUM_EMOTIONS]; NUM_EMOTIONS] }
    }

    /// Deterministic transitions `i -> targets[i]`.
    pub fn deterministic(targets: [EmotionState; NUM_EMOTIONS]) -> Self {
        let mut rows = [[T::zero(); NUM_EMOTIONS]; NUM_EMOTIONS];
        for (row, target) in rows.iter_mut().zip(targets) {
            row[target.index()] = T::one();
        }
        Self { rows }
    }

    pub fn rows(&self) -> &Rows<T> {
        &self.rows
    }

    pub fn row(&self, from: EmotionState) -> &[T; NUM_EMOTIONS] {
        &self.rows[from.index()]
    }

    pub fn get(&self, from: EmotionState, to: EmotionState) -> T {
        self.rows[from.index()][to.index()]
    }

    pub fn flatten(&self) -> Strategy<T> {
        Strategy(self.rows.iter().flatten().copied().collect())
    }

    pub fn unflatten(values: &[T]) -> Result<Self, MatrixError> {
        if values.len() != STRATEGY_LEN {
            return Err(MatrixError::Length { expected: STRATEGY_LEN, found: values.len() });
        }
        let mut rows = [[T::zero(); NUM_EMOTIONS]; NUM_EMOTIONS];
        for (row, chunk) in rows.iter_mut().zip(values.chunks_exact(NUM_EMOTIONS)) {
            row.copy_from_slice(chunk);
        }
        Self::from_rows(rows)
    }

    /// Mean per-row Shannon entropy in nats, `0 <= H <= ln 7`.
    pub fn entropy(&self) -> T {
        let total: T = self.rows.iter().flatten().filter(|&&p| p > T::zero()).map(|&p| p * p.ln()).sum();
        -total / T::lit(NUM_EMOTIONS as f64)
    }

    /// Draws the next emotion from the row of `current`.
    pub fn sample_next<R: Rng + ?Sized>(&self, current: EmotionState, rng: &mut R) -> EmotionState {
        let row = self.row(current);
        let u: f64 = rng.random();
        let mut cumulative = 0.0;
        let mut last_positive = current;
        for (j, &p) in row.iter().enumerate() {
            let p = p.as_f64();
            if p <= 0.0 {
                continue;
            }
            last_positive = EmotionState::ALL[j];
            cumulative += p;
            if u < cumulative {
                return last_positive;
            }
        }
        // u landed in the round-off gap above the cumulative sum
        last_positive
    }

    /// Applies a relabeling `sigma` to both rows and columns.
    pub fn permuted(&self, sigma: &[usize; NUM_EMOTIONS]) -> Self {
        let mut rows = [[T::zero(); NUM_EMOTIONS]; NUM_EMOTIONS];
        for i in 0..NUM_EMOTIONS {
            for j in 0..NUM_EMOTIONS {
                rows[sigma[i]][sigma[j]] = self.rows[i][j];
            }
        }
        Self { rows }
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.rows
            .iter()
            .flatten()
            .zip(other.rows.iter().flatten())
            .map(|(&a, &b)| (a - b).abs())
            .fold(T::zero(), T::max)
    }

    /// Converts precision; rows are renormalized in the target type.
    pub fn cast<U: Scalar>(&self) -> Result<StochasticMatrix<U>, MatrixError> {
        let mut rows = [[U::zero(); NUM_EMOTIONS]; NUM_EMOTIONS];
        for (dst, src) in rows.iter_mut().zip(&self.rows) {
            let total: f64 = src.iter().map(|p| p.as_f64()).sum();
            for (d, s) in dst.iter_mut().zip(src) {
                *d = U::lit(s.as_f64() / total);
            }
        }
        StochasticMatrix::from_rows(rows)
    }
}

/// Row-major flattening of a transition matrix, the surrogate's input space.
#[derive(Debug, Clone, PartialEq)]
pub struct Strategy<T>(Vec<T>);

impl<T: Scalar> Strategy<T> {
    /// Wraps raw coordinates. Only the length is checked; use
    /// [`StochasticMatrix::unflatten`] to check the probabilities.
    pub fn new(values: Vec<T>) -> Result<Self, MatrixError> {
        if values.len() != STRATEGY_LEN {
            return Err(MatrixError::Length { expected: STRATEGY_LEN, found: values.len() });
        }
        Ok(Self(values))
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<T> {
        self.0
    }

    pub fn to_matrix(&self) -> Result<StochasticMatrix<T>, MatrixError> {
        StochasticMatrix::unflatten(&self.0)
    }

    pub fn distance(&self, other: &Self) -> T {
        self.0.iter().zip(&other.0).map(|(&a, &b)| (a - b) * (a - b)).sum::<T>().sqrt()
    }
}

impl<T> AsRef<[T]> for Strategy<T> {
    fn as_ref(&self) -> &[T] {
        &self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emotion::psychological_priors;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn overfull_row_is_reported() {
        let mut rows = *psychological_priors::<f64>().rows();
        rows[2] = [0.5, 0.5, 0.0, 0.0, 0.0, 0.0, 0.1];
        let report = validate_rows(&rows).unwrap_err();
        assert_eq!(report.len(), 1);
        match &report[0] {
            Violation::RowSum { row, residual, .. } => {
                assert_eq!(*row, 2);
                assert!((residual - 0.1).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn negative_entry_is_reported() {
        let mut rows = *psychological_priors::<f64>().rows();
        rows[4][0] = -0.1;
        rows[4][1] = 0.35;
        let report = validate_rows(&rows).unwrap_err();
        assert!(report.iter().any(|v| matches!(v, Violation::Entry { row: 4, col: 0, .. })));
        assert!(StochasticMatrix::from_rows(rows).is_err());
    }

    #[test]
    fn flatten_round_trip_and_rejections() {
        let priors = psychological_priors::<f64>();
        let flat = priors.flatten();
        assert_eq!(&flat.as_slice()[..7], &[0.30, 0.15, 0.05, 0.10, 0.05, 0.05, 0.30]);
        assert_eq!(flat.to_matrix().unwrap(), priors);
        assert!(matches!(
            StochasticMatrix::<f64>::unflatten(&[0.0; 49]),
            Err(MatrixError::NotStochastic(v)) if v.len() == 7
        ));
        assert!(matches!(
            StochasticMatrix::<f64>::unflatten(&[0.1; 48]),
            Err(MatrixError::Length { expected: 49, found: 48 })
        ));
    }

    #[test]
    fn entropy_extremes() {
        let det = StochasticMatrix::<f64>::deterministic([
            EmotionState::Surprising,
            EmotionState::Angry,
            EmotionState::Sad,
            EmotionState::Disgust,
            EmotionState::Fear,
            EmotionState::Neutral,
            EmotionState::Happy,
        ]);
        assert_eq!(det.entropy(), 0.0);
        let uniform = StochasticMatrix::<f64>::uniform();
        assert!((uniform.entropy() - 7f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn one_hot_row_always_samples_target() {
        let mut rows = *StochasticMatrix::<f64>::uniform().rows();
        rows[EmotionState::Fear.index()] = [0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0];
        let m = StochasticMatrix::from_rows(rows).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            assert_eq!(m.sample_next(EmotionState::Fear, &mut rng), EmotionState::Sad);
        }
    }

    #[test]
    fn f32_matrices_validate_at_their_own_tolerance() {
        let priors = psychological_priors::<f32>();
        assert!(validate_rows(priors.rows()).is_ok());
        let cast: StochasticMatrix<f64> = priors.cast().unwrap();
        assert!(cast.max_abs_diff(&psychological_priors()) < 1e-7);
    }
}
