//! Floating-point abstraction shared by the matrix and surrogate code.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar usable as a probability or a regression value.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
    /// Largest tolerated deviation of a row sum from one.
    const ROW_SUM_TOLERANCE: f64;

    /// Converts an `f64` literal, panicking only if the target type cannot represent it at all.
    #[inline]
    fn lit(value: f64) -> Self {
        Self::from_f64(value).expect("scalar conversion from f64")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar conversion to f64")
    }
}

impl Scalar for f32 {
    const ROW_SUM_TOLERANCE: f64 = 1e-5;
}

impl Scalar for f64 {
    const ROW_SUM_TOLERANCE: f64 = 1e-9;
}

/// Standard normal density.
pub fn normal_pdf<T: Scalar>(z: T) -> T {
    let two = T::lit(2.0);
    (-(z * z) / two).exp() / (two * T::PI()).sqrt()
}

/// Standard normal cumulative distribution, evaluated in double precision.
pub fn normal_cdf<T: Scalar>(z: T) -> T {
    let z = z.as_f64();
    T::lit(0.5 * libm::erfc(-z / std::f64::consts::SQRT_2))
}
