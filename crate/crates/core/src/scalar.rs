//! Floating-point scalar abstraction: the numeric core is generic over [`Scalar`],
//! with concrete `f64` aliases exported at the crate root.

use num_traits::{Float, FromPrimitive};

/// Floating point scalar: f32 or f64.
pub trait Scalar:
    Float + FromPrimitive + std::fmt::Debug + std::fmt::Display + std::iter::Sum + Send + Sync + 'static
{
    /// Shorthand for an f64 constant.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant representable in scalar type")
    }

    /// Shorthand for an index/count.
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable in scalar type")
    }

    fn two() -> Self {
        Self::of(2.0)
    }

    fn half() -> Self {
        Self::of(0.5)
    }

    fn pi() -> Self {
        Self::of(std::f64::consts::PI)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
