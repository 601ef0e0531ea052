//! Scalar abstraction for the numeric kernels.

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar the analysis kernels are generic over.
///
/// Implemented for `f32` and `f64`; the pipeline and CLI run on `f64`.
pub trait Real: Float + FromPrimitive + ToPrimitive + std::fmt::Debug + std::fmt::Display {}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` constant into the scalar type.
pub(crate) fn real<T: Real>(v: f64) -> T {
    T::from_f64(v).expect("f64 constant representable in scalar type")
}

/// Converts a count into the scalar type.
pub(crate) fn real_count<T: Real>(n: usize) -> T {
    T::from_usize(n).expect("count representable in scalar type")
}
