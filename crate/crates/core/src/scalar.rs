use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, NumCast};

/// Floating-point scalar used for rates and sums.
///
/// Implemented for `f32` and `f64`. Every structure in the crate is generic
/// over it; the crate root exposes `f64` aliases for the common case.
pub trait Real:
    Float + FloatConst + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal or intermediate into this type.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as NumCast>::from(x).expect("f64 is representable in every Real type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("Real converts to f64")
    }

    /// Maps a uniform `f64` on [0, 1) onto this type, keeping the result
    /// strictly below one after rounding.
    #[inline]
    fn unit_from(u: f64) -> Self {
        let x = Self::lit(u);
        if x < Self::one() {
            x
        } else {
            Self::one() - Self::epsilon() / Self::lit(2.0)
        }
    }

    /// Converts a count into this type.
    #[inline]
    fn from_count(n: usize) -> Self {
        Self::lit(n as f64)
    }
}

impl Real for f32 {}
impl Real for f64 {}
