//! Scalar abstraction shared by the p-value constructions and the step-up rules.
//!
//! Counting-based quantities (empirical p-values, BH thresholds, the FDR
//! sandwich) only need field arithmetic and an order, so they are written
//! against [`Scalar`]. That lets the same code run in `f32`/`f64` for speed
//! and in [`Rational64`] when boundary comparisons must be exact.

use std::fmt::{Debug, Display};

use num_rational::Rational64;
use num_traits::{Num, ToPrimitive};

pub trait Scalar:
    Copy + PartialOrd + Num + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Exact image of a count. Floating types lose exactness above their
    /// mantissa width (2^24 for `f32`, 2^53 for `f64`).
    fn from_count(count: usize) -> Self;

    /// Nearest representable value of an `f64`; `None` for non-finite input.
    fn from_f64_approx(value: f64) -> Option<Self>;

    fn is_finite_value(&self) -> bool;

    fn floor_value(self) -> Self;

    fn is_integer_value(&self) -> bool {
        self.is_finite_value() && self.floor_value() == *self
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn from_count(count: usize) -> Self {
        count as f64
    }

    fn from_f64_approx(value: f64) -> Option<Self> {
        value.is_finite().then_some(value)
    }

    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }

    fn floor_value(self) -> Self {
        self.floor()
    }
}

impl Scalar for f32 {
    fn from_count(count: usize) -> Self {
        count as f32
    }

    fn from_f64_approx(value: f64) -> Option<Self> {
        let v = value as f32;
        v.is_finite().then_some(v)
    }

    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }

    fn floor_value(self) -> Self {
        self.floor()
    }
}

impl Scalar for Rational64 {
    fn from_count(count: usize) -> Self {
        Rational64::from_integer(count as i64)
    }

    fn from_f64_approx(value: f64) -> Option<Self> {
        if !value.is_finite() {
            return None;
        }
        Rational64::approximate_float(value)
    }

    fn is_finite_value(&self) -> bool {
        true
    }

    fn floor_value(self) -> Self {
        self.floor()
    }
}

/// `true` iff `coef * count >= rhs` in exact real arithmetic.
///
/// A fused multiply-add rounds once, and rounding never flips the sign of a
/// nonzero result, so the sign of `coef * count - rhs` is exact.
pub(crate) fn fma_ge(coef: f64, count: f64, rhs: f64) -> bool {
    coef.mul_add(count, -rhs) >= 0.0
}
