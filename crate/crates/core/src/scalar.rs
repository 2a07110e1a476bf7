use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point element type of a parameter store.
///
/// Everything in this crate is written against `Scalar` so that the same
/// selection and crossover code runs on `f32` training weights and on `f64`
/// reference networks.
pub trait Scalar:
    Float + NumAssign + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Raw bit pattern, widened to 64 bits. Used for change detection, where
    /// `-0.0 == 0.0` must still count as a modification.
    fn to_bits_u64(self) -> u64;

    /// Lossy conversion from a count or an epoch index.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable as a float")
    }

    /// Lossy conversion from an `f64` literal.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable as a float")
    }
}

impl Scalar for f32 {
    fn to_bits_u64(self) -> u64 {
        u64::from(self.to_bits())
    }
}

impl Scalar for f64 {
    fn to_bits_u64(self) -> u64 {
        self.to_bits()
    }
}

/// True when `a` and `b` have different bit patterns.
#[inline]
pub fn bits_differ<S: Scalar>(a: S, b: S) -> bool {
    a.to_bits_u64() != b.to_bits_u64()
}
