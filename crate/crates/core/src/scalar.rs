//! Scalar abstraction shared by every numeric routine in the crate.
//!
//! Step functions, distortion functions and the allocation constructions only
//! need ordered-field arithmetic, so they are generic over [`Scalar`] and run
//! unchanged on `f64`, `f32` or exact rationals. Measures that need `exp`/`ln`
//! (entropic) or an iterative solve (expectile) require [`Real`].

use std::fmt::{Debug, Display};
use std::ops::Neg;

use num_rational::Ratio;
use num_traits::{Float, FromPrimitive, Num, ToPrimitive};

/// An ordered field element usable as a probability, a quantile level or a
/// monetary value.
pub trait Scalar:
    Num
    + Neg<Output = Self>
    + Copy
    + PartialOrd
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Breakpoints, levels and atom values closer than this are one point.
    /// Zero for exact types.
    fn merge_tolerance() -> Self;

    /// Default tolerance for equality assertions. Zero for exact types.
    fn check_tolerance() -> Self;

    fn is_finite_value(&self) -> bool;

    /// `num / den`, exact whenever the type allows it.
    fn ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num).expect("integer conversion")
            / Self::from_i64(den).expect("integer conversion")
    }

    /// Converts a literal, approximating for exact types.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).unwrap_or_else(|| panic!("{x} is not representable"))
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

/// Scalars with transcendental functions.
pub trait Real: Scalar + Float {}

impl Scalar for f64 {
    fn merge_tolerance() -> Self {
        1e-12
    }
    fn check_tolerance() -> Self {
        1e-9
    }
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl Scalar for f32 {
    fn merge_tolerance() -> Self {
        1e-6
    }
    fn check_tolerance() -> Self {
        1e-4
    }
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl Real for f64 {}
impl Real for f32 {}

impl Scalar for Ratio<i64> {
    fn merge_tolerance() -> Self {
        Ratio::from_integer(0)
    }
    fn check_tolerance() -> Self {
        Ratio::from_integer(0)
    }
    fn is_finite_value(&self) -> bool {
        true
    }
    fn ratio(num: i64, den: i64) -> Self {
        Ratio::new(num, den)
    }
}

#[inline]
pub fn abs<T: Scalar>(x: T) -> T {
    if x < T::zero() {
        -x
    } else {
        x
    }
}

#[inline]
pub fn min<T: Scalar>(a: T, b: T) -> T {
    if b < a {
        b
    } else {
        a
    }
}

#[inline]
pub fn max<T: Scalar>(a: T, b: T) -> T {
    if b > a {
        b
    } else {
        a
    }
}

/// `|a - b| <= tol`.
#[inline]
pub fn close<T: Scalar>(a: T, b: T, tol: T) -> bool {
    abs(a - b) <= tol
}

/// Tolerance scaled by the magnitude of `reference`, never below `base`.
#[inline]
pub fn scaled<T: Scalar>(base: T, reference: T) -> T {
    base * max(T::one(), abs(reference))
}
