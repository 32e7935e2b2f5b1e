use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign};

/// Floating point scalar the numerics are written against (f32 or f64).
pub trait Scalar:
    Float + FromPrimitive + NumAssign + Sum + Default + Debug + Display + Send + Sync + 'static
{
}

impl<T> Scalar for T where
    T: Float + FromPrimitive + NumAssign + Sum + Default + Debug + Display + Send + Sync + 'static
{
}

/// Converts an f64 literal into the working scalar type.
#[inline]
pub fn lit<S: Scalar>(x: f64) -> S {
    S::from_f64(x).expect("f64 literal representable in scalar type")
}

#[inline]
pub(crate) fn to_f64<S: Scalar>(x: S) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[inline]
pub(crate) fn from_usize<S: Scalar>(n: usize) -> S {
    S::from_usize(n).expect("usize representable in scalar type")
}

/// Volume of the unit ball in dimension 1, 2 or 3.
pub fn unit_ball_volume<S: Scalar>(dim: usize) -> S {
    match dim {
        1 => lit(2.0),
        2 => lit(std::f64::consts::PI),
        3 => lit(4.0 * std::f64::consts::PI / 3.0),
        _ => S::nan(),
    }
}
