//! Scalar traits the rest of the crate is generic over.
//!
//! Integer algebra runs over any [`IntScalar`]: fixed-width `i64`/`i128`
//! for quick experiments, [`num_bigint::BigInt`] when intermediate values
//! may grow without bound. The simulator is generic over [`RealScalar`]
//! (`f32`/`f64`).

use std::fmt::{Debug, Display};
use std::hash::Hash;

use num_integer::Integer;
use num_traits::{Float, FloatConst, FromPrimitive, Signed, ToPrimitive};

/// Exact signed integer usable as a matrix entry.
///
/// Fixed-width implementors overflow silently in release builds; prefer
/// `BigInt` unless the magnitudes involved are known to be small.
pub trait IntScalar:
    Integer + Signed + Clone + Hash + Debug + Display + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    fn from_i64_lossless(v: i64) -> Self {
        Self::from_i64(v).expect("every IntScalar represents i64")
    }

    fn two() -> Self {
        Self::one() + Self::one()
    }
}

impl<T> IntScalar for T where
    T: Integer + Signed + Clone + Hash + Debug + Display + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
}

/// Floating-point scalar for the signal simulator.
pub trait RealScalar: Float + FloatConst + Debug + Display + Send + Sync + 'static {
    fn from_f64_lossy(v: f64) -> Self {
        Self::from(v).expect("finite f64 converts")
    }
}

impl<F> RealScalar for F where F: Float + FloatConst + Debug + Display + Send + Sync + 'static {}

/// Extended gcd returning `(g, x, y)` with `a*x + b*y = g` and `g >= 0`.
pub(crate) fn ext_gcd<T: IntScalar>(a: &T, b: &T) -> (T, T, T) {
    let e = a.extended_gcd(b);
    if e.gcd.is_negative() {
        (-e.gcd, -e.x, -e.y)
    } else {
        (e.gcd, e.x, e.y)
    }
}
