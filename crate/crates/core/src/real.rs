//! Scalar abstraction: all numerical routines are generic over `Real`,
//! which is satisfied by `f32` and `f64`.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Floating-point scalar for the whole crate.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Debug + Display + Default + Send + Sync + 'static
{
    /// Lift an `f64` constant into this scalar type.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("constant not representable in scalar type")
    }

    #[inline]
    fn two() -> Self {
        Self::one() + Self::one()
    }

    #[inline]
    fn half() -> Self {
        Self::one() / Self::two()
    }
}

impl Real for f32 {}
impl Real for f64 {}
