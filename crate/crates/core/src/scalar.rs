//! Floating point abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar type the recurrences are evaluated in.
///
/// Implemented for `f32` and `f64`. All algorithms are written against this
/// trait; the crate root exposes `f64` aliases for the common case.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Converts a count or index into `Self`.
    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable in scalar type")
    }

    /// Lossy widening to `f64`, used for reporting and serialization.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Threshold below which a computed off-diagonal entry is treated as zero.
///
/// `scale` is the running magnitude of the matrix being built.
#[inline]
pub fn degeneracy_threshold<T: Scalar>(scale: T) -> T {
    T::lit(1e3) * T::epsilon() * scale.max(T::one())
}

/// Distance under which two nodes of a discrete measure are merged.
#[inline]
pub fn merge_threshold<T: Scalar>(node: T) -> T {
    T::lit(4.0) * T::epsilon() * node.abs().max(T::one())
}

/// Tolerance of the scaling-matrix normalization check for type `T`.
#[inline]
pub fn normalization_tolerance<T: Scalar>() -> T {
    T::lit(1e-10).max(T::lit(1e4) * T::epsilon())
}
