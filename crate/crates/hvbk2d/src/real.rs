//! Floating-point scalar abstraction for the solver kernels.

use num_traits::{Float, FloatConst, NumAssignOps, ToPrimitive};
use rustfft::FftNum;

/// Scalar type every kernel is generic over: `f32` or `f64`.
///
/// The verification tolerances in the test suites are calibrated for `f64`;
/// `f32` builds are supported for memory-bound exploratory runs.
pub trait Real:
    FftNum
    + Float
    + FloatConst
    + NumAssignOps
    + ToPrimitive
    + Default
    + std::iter::Sum
    + std::fmt::Display
    + std::fmt::LowerExp
{
    /// Convert an `f64` literal (tolerances, defaults, table entries) into `Self`.
    fn lit(v: f64) -> Self;

    /// Widen to `f64` for reporting and serialization.
    fn as_f64(self) -> f64;

    /// Index/count conversion, exact for any size a grid can reach.
    fn from_count(n: usize) -> Self {
        Self::lit(n as f64)
    }
}

impl Real for f32 {
    #[inline]
    fn lit(v: f64) -> Self {
        v as f32
    }
    #[inline]
    fn as_f64(self) -> f64 {
        f64::from(self)
    }
}

impl Real for f64 {
    #[inline]
    fn lit(v: f64) -> Self {
        v
    }
    #[inline]
    fn as_f64(self) -> f64 {
        self
    }
}
