//! Scalar abstraction for dual-arithmetic mode.
//!
//! Set identities, measurability checks, conditional expectations and
//! stopped values involve only field operations, so they run over any
//! [`Scalar`]: exactly over `BigRational`, approximately over `f64`.
//! Everything with a fractional power (dual weights, norms, condition
//! constants) is pinned to `f64`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, ToPrimitive};

/// Field scalar the tree and conditional-expectation layer is generic over.
pub trait Scalar:
    Clone + core::fmt::Debug + PartialOrd + Signed + FromPrimitive + ToPrimitive
{
    /// True when arithmetic is exact (no rounding anywhere).
    const EXACT: bool;

    /// The scalar `n/d`. Panics if `d == 0`.
    fn from_ratio(n: i64, d: i64) -> Self;
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_ratio(n: i64, d: i64) -> Self {
        assert!(d != 0, "zero denominator");
        n as f64 / d as f64
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_ratio(n: i64, d: i64) -> Self {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }
}

/// Larger of two scalars under `PartialOrd`; ties and incomparable pairs
/// keep the first argument. Values here are always finite, so the partial
/// order is total in practice.
pub fn max_scalar<S: Scalar>(a: S, b: S) -> S {
    if b > a {
        b
    } else {
        a
    }
}
