//! Scalar abstraction for the numerical kernels.
//!
//! Everything in this crate is generic over [`Scalar`], a floating-point
//! trait assembled from `num-traits`. The shipped lab runs on `f64` (see the
//! aliases at the crate root); `f32` satisfies the same bound and is exercised
//! by a couple of smoke tests, but the documented tolerances assume `f64`.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Lift an `f64` literal into the scalar type.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("literal not representable in scalar type")
    }

    /// Lift a `usize` (grid sizes, counters) into the scalar type.
    fn of_usize(v: usize) -> Self {
        Self::from_usize(v).expect("count not representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar not representable as f64")
    }
}

impl<T> Scalar for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + ToPrimitive
        + AddAssign
        + SubAssign
        + MulAssign
        + DivAssign
        + Sum
        + Default
        + Debug
        + Display
        + LowerExp
        + Send
        + Sync
        + 'static
{
}

/// Machine-precision scale used for "round-off" assertions.
pub fn round_off<S: Scalar>() -> S {
    S::epsilon() * S::of(64.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literals_round_trip() {
        let x: f64 = Scalar::of(0.25);
        assert_eq!(x, 0.25);
        let y: f32 = Scalar::of(1.5);
        assert_eq!(y, 1.5f32);
        assert_eq!(<f64 as Scalar>::of_usize(7), 7.0);
    }

    #[test]
    fn pi_from_float_const() {
        fn pi_of<S: Scalar>() -> S {
            S::PI()
        }
        assert!((pi_of::<f64>() - std::f64::consts::PI).abs() < 1e-15);
        assert!((pi_of::<f32>() - std::f32::consts::PI).abs() < 1e-6);
    }
}
