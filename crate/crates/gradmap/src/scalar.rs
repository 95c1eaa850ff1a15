//! Scalar abstraction for the polyhedral routines.
//!
//! Cone membership, face enumeration and the LP core run either in exact
//! rational arithmetic or in floating point with a feasibility tolerance.
//! Both modes share one implementation, generic over [`Scalar`]. Concrete
//! aliases live at the crate root: [`crate::Exact`] and plain `f64`.

use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Ordered-field scalar for polyhedral computations.
///
/// The tolerance returned by [`Scalar::feas_tol`] is the single knob
/// separating the two modes: exact arithmetic reports zero and compares
/// exactly, floating point reports a feasibility tolerance used by pivot
/// selection and sign tests.
pub trait Scalar:
    Clone
    + PartialEq
    + PartialOrd
    + Debug
    + Display
    + Zero
    + One
    + Signed
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// True for arithmetic with no rounding error.
    const EXACT: bool;

    fn from_int(n: i64) -> Self;

    /// Ratio p/q as a scalar. `q` must be nonzero.
    fn from_ratio(p: i64, q: i64) -> Self;

    fn to_f64(&self) -> f64;

    /// Feasibility tolerance: zero in exact mode.
    fn feas_tol() -> Self;

    /// Sign test against the feasibility tolerance.
    fn is_positive_tol(&self) -> bool {
        *self > Self::feas_tol()
    }

    fn is_negative_tol(&self) -> bool {
        *self < -Self::feas_tol()
    }

    fn is_zero_tol(&self) -> bool {
        !self.is_positive_tol() && !self.is_negative_tol()
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_int(n: i64) -> Self {
        n as f64
    }

    fn from_ratio(p: i64, q: i64) -> Self {
        p as f64 / q as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn feas_tol() -> Self {
        1e-9
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_int(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }

    fn from_ratio(p: i64, q: i64) -> Self {
        BigRational::new(BigInt::from(p), BigInt::from(q))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).expect("rational out of f64 range")
    }

    fn feas_tol() -> Self {
        BigRational::zero()
    }
}

/// Nearest rational to `x` with denominator at most `max_den`, by continued
/// fraction expansion. Returns `None` for non-finite input.
pub fn rationalize(x: f64, max_den: u64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    // Continued fraction convergents p_k/q_k of |x|.
    let neg = x < 0.0;
    let mut v = x.abs();
    let (mut p0, mut q0, mut p1, mut q1) = (0i128, 1i128, 1i128, 0i128);
    for _ in 0..64 {
        let a = v.floor();
        if a > i64::MAX as f64 {
            return None;
        }
        let a_int = a as i128;
        let p2 = a_int * p1 + p0;
        let q2 = a_int * q1 + q0;
        if q2 > max_den as i128 {
            break;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        let frac = v - a;
        if frac < 1e-15 * v.abs().max(1.0) {
            break;
        }
        v = 1.0 / frac;
    }
    if q1 == 0 {
        return None;
    }
    // Only a convergent that reproduces the input is trusted; the best
    // approximation under the cap is rejected for genuinely irrational
    // values rather than silently substituted.
    let approx = p1 as f64 / q1 as f64;
    if (x.abs() - approx).abs() > 1e-13 * x.abs().max(1.0) {
        return None;
    }
    let num = if neg { -p1 } else { p1 };
    Some(BigRational::new(BigInt::from(num), BigInt::from(q1)))
}
