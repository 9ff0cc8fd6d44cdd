//! Scalar abstraction for the numerical core.
//!
//! Everything in the math layer is generic over [`Scalar`] so the same code
//! runs on `f32` and `f64`. The crate-root aliases pin `f64`, which is what
//! the CLI and the file formats use.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign};

/// Floating-point scalar usable by the dense linear algebra and the rounding
/// algorithms: IEEE float semantics, assignment operators, summation, and
/// conversion from literals.
pub trait Scalar:
    Float + NumAssign + FromPrimitive + Sum<Self> + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal (tolerances, algorithm
    /// constants). Panics only if the target type cannot represent any
    /// approximation of the value, which cannot happen for finite literals.
    #[inline]
    fn cast(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 literal must convert")
    }

    /// `self` as `f64`, for reporting and serialization boundaries.
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    #[inline]
    fn two() -> Self {
        Self::one() + Self::one()
    }

    #[inline]
    fn half() -> Self {
        Self::cast(0.5)
    }
}

impl<T> Scalar for T where
    T: Float
        + NumAssign
        + FromPrimitive
        + Sum<T>
        + Debug
        + Display
        + Default
        + Send
        + Sync
        + 'static
{
}
