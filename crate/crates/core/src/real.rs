//! Binary floating point with a per-computation mantissa precision.
//!
//! `Real` is a thin newtype over a base-2 `dashu` float rounded half-to-even.
//! Arithmetic between two values yields the larger of the two precisions, so
//! a computation seeded with constants of precision `p` stays at `p`.

use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, Div, Mul, Neg, Sub};

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;

type Float = FBig<HalfEven, 2>;

/// Smallest supported mantissa precision in bits.
pub const MIN_PRECISION: usize = 64;

/// Working precision used for synthesis at target accuracy `2^-n`.
pub fn working_precision(n: usize) -> usize {
    core::cmp::max(128, 4 * n + 64)
}

#[derive(Clone, PartialEq, PartialOrd)]
pub struct Real(Float);

impl Real {
    fn wrap(x: Float, precision: usize) -> Self {
        Real(x.with_precision(precision).value())
    }

    pub fn zero(precision: usize) -> Self {
        Self::wrap(Float::ZERO, precision)
    }

    pub fn one(precision: usize) -> Self {
        Self::wrap(Float::ONE, precision)
    }

    pub fn from_f64(x: f64, precision: usize) -> Self {
        let f = Float::try_from(x).expect("finite f64");
        Self::wrap(f, precision)
    }

    pub fn from_i64(x: i64, precision: usize) -> Self {
        Self::wrap(Float::from(x), precision)
    }

    /// Exact ratio `num / den` rounded to `precision`.
    pub fn from_ratio(num: i64, den: i64, precision: usize) -> Self {
        Self::from_i64(num, precision) / Self::from_i64(den, precision)
    }

    /// `2^exp`, exact.
    pub fn pow2(exp: isize, precision: usize) -> Self {
        Self::wrap(Float::from_parts(1.into(), exp), precision)
    }

    pub fn pi(precision: usize) -> Self {
        Real(Float::pi(precision))
    }

    pub fn precision(&self) -> usize {
        self.0.precision()
    }

    /// Re-round to a different precision.
    pub fn with_precision(&self, precision: usize) -> Self {
        Self::wrap(self.0.clone(), precision)
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().value()
    }

    pub fn is_zero(&self) -> bool {
        self.0.repr().significand().is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0 < Float::ZERO
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    pub fn square(&self) -> Self {
        self * self
    }

    pub fn sqrt(&self) -> Self {
        if self.is_negative() || self.is_zero() {
            return Self::zero(self.precision());
        }
        Real(self.0.sqrt())
    }

    pub fn sin(&self) -> Self {
        Real(self.0.sin())
    }

    pub fn cos(&self) -> Self {
        Real(self.0.cos())
    }

    /// Arcsine with the argument clamped to `[-1, 1]`.
    pub fn asin(&self) -> Self {
        let p = self.precision();
        let x = self.clamp_unit();
        if x.is_zero() {
            return Self::zero(p);
        }
        Real(x.0.asin())
    }

    /// Arccosine with the argument clamped to `[-1, 1]`.
    pub fn acos(&self) -> Self {
        let p = self.precision();
        let x = self.clamp_unit();
        Real(x.0.with_precision(p).value().acos())
    }

    pub fn atan2(&self, x: &Real) -> Self {
        let p = core::cmp::max(self.precision(), x.precision());
        if self.is_zero() && x.is_zero() {
            return Self::zero(p);
        }
        Real(self.0.atan2(&x.0))
    }

    fn clamp_unit(&self) -> Self {
        let p = self.precision();
        let one = Self::one(p);
        if *self > one {
            one
        } else if *self < -&one {
            -one
        } else {
            self.clone()
        }
    }

    /// `floor(log2 |x|)`, or `None` for zero.
    pub fn log2_floor(&self) -> Option<isize> {
        if self.is_zero() {
            return None;
        }
        let repr = self.0.repr();
        let bits = repr.digits() as isize;
        Some(repr.exponent() + bits - 1)
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn total_cmp(&self, other: &Self) -> Ordering {
        self.partial_cmp(other).unwrap_or(Ordering::Equal)
    }
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e}", self.to_f64())
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.to_f64(), f)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident) => {
        impl<'a> $tr<&'a Real> for &'a Real {
            type Output = Real;
            #[inline]
            fn $method(self, rhs: &'a Real) -> Real {
                Real($tr::$method(&self.0, &rhs.0))
            }
        }
        impl $tr<Real> for Real {
            type Output = Real;
            #[inline]
            fn $method(self, rhs: Real) -> Real {
                Real($tr::$method(self.0, rhs.0))
            }
        }
        impl<'a> $tr<&'a Real> for Real {
            type Output = Real;
            #[inline]
            fn $method(self, rhs: &'a Real) -> Real {
                Real($tr::$method(self.0, &rhs.0))
            }
        }
        impl<'a> $tr<Real> for &'a Real {
            type Output = Real;
            #[inline]
            fn $method(self, rhs: Real) -> Real {
                Real($tr::$method(&self.0, rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(-self.0)
    }
}

impl Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(-self.0.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precision_propagates_through_arithmetic() {
        let a = Real::from_f64(0.1, 192);
        let b = Real::from_f64(0.2, 192);
        assert_eq!((&a * &b).precision(), 192);
        assert_eq!((a + b).sqrt().precision(), 192);
    }

    #[test]
    fn transcendental_functions_match_f64() {
        let x = Real::from_f64(0.3, 128);
        assert!((x.sin().to_f64() - 0.3f64.sin()).abs() < 1e-15);
        assert!((x.cos().to_f64() - 0.3f64.cos()).abs() < 1e-15);
        assert!((x.asin().to_f64() - 0.3f64.asin()).abs() < 1e-15);
        assert!((x.acos().to_f64() - 0.3f64.acos()).abs() < 1e-15);
        let y = Real::from_f64(-0.7, 128);
        assert!((x.atan2(&y).to_f64() - 0.3f64.atan2(-0.7)).abs() < 1e-15);
    }

    #[test]
    fn asin_clamps_out_of_range() {
        let p = 128;
        let x = Real::from_f64(1.0 + 1e-12, p);
        let half_pi = Real::pi(p) / Real::from_i64(2, p);
        assert_eq!(x.asin(), half_pi);
        assert!(Real::from_f64(-2.0, p).acos() == Real::pi(p));
    }

    #[test]
    fn log2_floor_and_pow2() {
        let p = 128;
        assert_eq!(Real::pow2(-30, p).log2_floor(), Some(-30));
        assert_eq!(Real::from_f64(3.0, p).log2_floor(), Some(1));
        assert_eq!(Real::from_f64(0.75, p).log2_floor(), Some(-1));
        assert_eq!(Real::zero(p).log2_floor(), None);
    }

    #[test]
    fn high_precision_is_actually_used() {
        // 1 + 2^-100 is distinguishable from 1 at 128 bits but not at 64.
        let hi = Real::one(128) + Real::pow2(-100, 128);
        assert!(hi > Real::one(128));
        let lo = Real::one(64) + Real::pow2(-100, 64);
        assert!(lo == Real::one(64));
    }
}
