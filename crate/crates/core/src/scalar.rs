//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, NumCast};

/// Floating point type probabilities and scores are computed in: `f32` or `f64`.
///
/// `Display` must print the shortest representation that parses back to the
/// same bits, which holds for the primitive floats; pool files rely on it.
pub trait Scalar:
    Float + FromPrimitive + NumCast + FromStr + Display + Debug + Default + Sum + Send + Sync + 'static
{
    /// Lossless-enough conversion from a count or ratio computed in `f64`.
    #[inline]
    fn of(x: f64) -> Self {
        <Self as NumCast>::from(x).expect("f64 is representable in every Scalar")
    }

    #[inline]
    fn of_usize(x: usize) -> Self {
        <Self as FromPrimitive>::from_usize(x).expect("usize is representable in every Scalar")
    }

    /// Exact ratio of two integer counts, rounded once.
    #[inline]
    fn ratio(num: i128, den: i128) -> Self {
        Self::of(num as f64 / den as f64)
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("Scalar always converts to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
