//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real floating-point scalar: `f32` or `f64`.
///
/// Tolerances throughout the crate are stated for `f64`; routines clamp them
/// from below by a small multiple of [`Float::epsilon`] so the same code runs
/// in single precision.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Converts a count into this scalar type.
    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    /// Lossy conversion used for reporting and hashing.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `max(tol, factor * epsilon)`, so `f64` tolerances stay meaningful for `f32`.
    #[inline]
    fn tol(tol: f64, factor: f64) -> Self {
        let t = Self::lit(tol);
        let floor = Self::epsilon() * Self::lit(factor);
        if t > floor {
            t
        } else {
            floor
        }
    }
}

impl Real for f32 {}
impl Real for f64 {}
