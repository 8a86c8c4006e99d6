//! Scalar abstraction for the type-generic numeric kernels.

use num_traits::{Float, FloatConst, FromPrimitive};

/// Real scalar the generic numeric code is written against.
///
/// `f32` and `f64` both satisfy this; the crate-root aliases pick `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + core::iter::Sum + core::fmt::Debug + Send + Sync + 'static
{
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }
}

impl<T> Real for T where
    T: Float + FloatConst + FromPrimitive + core::iter::Sum + core::fmt::Debug + Send + Sync + 'static
{
}
