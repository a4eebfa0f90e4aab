//! Scalar abstraction shared by the numeric modules.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssignOps, ToPrimitive};

/// Real-valued scalar the swap math, optimizers and statistics are generic over.
///
/// Implemented for `f32` and `f64`. Tolerances inside the library are expressed
/// relative to [`Real::tolerance`] so single precision still behaves sensibly.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssignOps
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Every `f64` is representable (possibly rounded).
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }

    /// Relative tolerance used for internal consistency checks.
    fn tolerance() -> Self;
}

impl Real for f64 {
    #[inline]
    fn tolerance() -> Self {
        1e-9
    }
}

impl Real for f32 {
    #[inline]
    fn tolerance() -> Self {
        1e-4
    }
}

/// `|a - b| <= tol * max(|a|, |b|)`; scale-free, for prices spanning many decades.
#[inline]
pub(crate) fn rel_eq<T: Real>(a: T, b: T, tol: T) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}
