use super::matrix::StochasticMatrix;
use super::state::NUM_EMOTIONS;
use crate::scalar::Scalar;

/// Initial transition probabilities in whole percent, rows and columns in
/// `EmotionState` order. Each row sums to exactly 100.
pub const PRIOR_PERCENT: [[u32; NUM_EMOTIONS]; NUM_EMOTIONS] = [
    [30, 15, 5, 10, 5, 5, 30],    // happy
    [20, 20, 15, 10, 10, 10, 15], // surprising
    [10, 10, 25, 15, 15, 10, 15], // angry
    [15, 10, 10, 20, 10, 15, 20], // sad
    [10, 15, 20, 15, 15, 10, 15], // disgust
    [15, 10, 10, 20, 10, 15, 20], // fear
    [15, 15, 15, 15, 10, 10, 20], // neutral
];

/// Psychologically grounded starting point for the search.
pub fn psychological_priors<T: Scalar>() -> StochasticMatrix<T> {
    let hundred = T::lit(100.0);
    let mut rows = [[T::zero(); NUM_EMOTIONS]; NUM_EMOTIONS];
    for (dst, src) in rows.iter_mut().flatten().zip(PRIOR_PERCENT.iter().flatten()) {
        *dst = T::lit(f64::from(*src)) / hundred;
    }
    StochasticMatrix::from_rows(rows).expect("prior table is row-stochastic")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emotion::EmotionState;

    #[test]
    fn percent_rows_sum_to_exactly_one_hundred() {
        for row in PRIOR_PERCENT {
            assert_eq!(row.iter().sum::<u32>(), 100);
        }
    }

    #[test]
    fn happy_and_neutral_rows() {
        let p = psychological_priors::<f64>();
        assert_eq!(p.row(EmotionState::Happy), &[0.30, 0.15, 0.05, 0.10, 0.05, 0.05, 0.30]);
        assert_eq!(p.row(EmotionState::Neutral), &[0.15, 0.15, 0.15, 0.15, 0.10, 0.10, 0.20]);
    }
}
