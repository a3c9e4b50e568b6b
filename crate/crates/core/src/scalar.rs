//! Numeric carrier for the finite part of the max-plus semiring.

use std::fmt::{Debug, Display};
use std::ops::Add;

use num_traits::{FromPrimitive, ToPrimitive, Zero};

/// Ordered additive number type usable as the finite part of a max-plus scalar.
///
/// Implemented automatically for `f32`, `f64` and exact rationals such as
/// [`num_rational::Rational64`]. Values must be totally ordered among
/// themselves; NaN is never a valid finite entry.
pub trait Scalar:
    Copy
    + PartialOrd
    + Zero
    + Add<Output = Self>
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion used for reporting.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Conversion from a sampled service time.
    fn from_sample(x: f64) -> Self {
        Self::from_f64(x).expect("sample not representable in scalar type")
    }
}

impl<T> Scalar for T where
    T: Copy
        + PartialOrd
        + Zero
        + Add<Output = T>
        + FromPrimitive
        + ToPrimitive
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}
