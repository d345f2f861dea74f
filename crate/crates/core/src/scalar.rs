//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Bounded, Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + Bounded
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into the scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(k: usize) -> Self {
        Self::from_usize(k).expect("index representable in scalar type")
    }

    /// `max(floor, k * epsilon)`: tolerances that must survive single precision.
    #[inline]
    fn tol_at_least(floor: f64, eps_multiple: f64) -> Self {
        Self::lit(floor).max(Self::epsilon() * Self::lit(eps_multiple))
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Point in R^n stored with three components; unused trailing components are zero.
pub type Point<T> = [T; 3];

#[inline]
pub fn norm<T: Real>(x: &Point<T>) -> T {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

#[inline]
pub fn dist_sq<T: Real>(x: &Point<T>, y: &Point<T>) -> T {
    let d0 = x[0] - y[0];
    let d1 = x[1] - y[1];
    let d2 = x[2] - y[2];
    d0 * d0 + d1 * d1 + d2 * d2
}

#[inline]
pub fn dot<T: Real>(x: &Point<T>, y: &Point<T>) -> T {
    x[0] * y[0] + x[1] * y[1] + x[2] * y[2]
}
