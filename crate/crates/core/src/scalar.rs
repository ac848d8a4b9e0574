//! Scalar abstraction shared by every numeric kernel.
//!
//! Kernels are written once against [`Scalar`] and instantiated for `f32` and
//! `f64`. The pipeline runs in `f64` even though the interchange format stores
//! `f32` values.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real floating-point type usable by the fusion kernels.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Relative threshold below which a singular value or an `R` diagonal
    /// entry counts as zero.
    fn rank_tolerance() -> Self;

    /// Lossless-enough conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl Scalar for f64 {
    #[inline]
    fn rank_tolerance() -> Self {
        1e-10
    }
}

impl Scalar for f32 {
    // 1e-10 is far below f32 resolution; use a small multiple of epsilon.
    #[inline]
    fn rank_tolerance() -> Self {
        64.0 * f32::EPSILON
    }
}
