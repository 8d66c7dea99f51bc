//! Dual-mode arithmetic kernel.
//!
//! Every evaluator in this crate is generic over [`Scalar`] and can run in two
//! modes: exact big-rational arithmetic (fixtures, small instances, anything
//! parsed from fraction literals) and plain `f64` (everything else). The two
//! implementations live here so the numeric policy — tolerances, compensated
//! summation, clamping — is decided in exactly one place.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Absolute tolerance for float-mode equality and mass checks.
///
/// Double precision with at most `n - 1` two-entry mixing steps accumulates
/// error well below this, so a single constant covers the whole crate.
pub const TOLERANCE: f64 = 1e-12;

/// Which arithmetic backs a computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithmeticMode {
    /// Binary 64-bit floats with compensated summation.
    Float64,
    /// Arbitrary-precision rationals; all comparisons are exact.
    Rational,
}

impl fmt::Display for ArithmeticMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArithmeticMode::Float64 => write!(f, "float64"),
            ArithmeticMode::Rational => write!(f, "rational"),
        }
    }
}

/// Order-sensitive sum accumulator.
///
/// The float implementation uses Neumaier's compensated summation so the
/// alternating-sign subset sums stay accurate even when individual terms
/// exceed the result by orders of magnitude. The rational implementation is a
/// plain running sum, which is already exact.
pub trait Accumulator<S>: Default {
    fn push(&mut self, term: S);
    fn total(&self) -> S;
}

/// Neumaier variant of Kahan summation.
#[derive(Debug, Default, Clone)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl Accumulator<f64> for NeumaierSum {
    fn push(&mut self, term: f64) {
        let t = self.sum + term;
        if self.sum.abs() >= term.abs() {
            self.compensation += (self.sum - t) + term;
        } else {
            self.compensation += (term - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Exact running sum over big rationals.
#[derive(Debug, Clone)]
pub struct ExactSum(BigRational);

impl Default for ExactSum {
    fn default() -> Self {
        ExactSum(BigRational::zero())
    }
}

impl Accumulator<BigRational> for ExactSum {
    fn push(&mut self, term: BigRational) {
        self.0 = &self.0 + term;
    }

    fn total(&self) -> BigRational {
        self.0.clone()
    }
}

/// Number type the probability kernels are generic over.
pub trait Scalar:
    Clone
    + PartialEq
    + PartialOrd
    + fmt::Debug
    + fmt::Display
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const MODE: ArithmeticMode;

    type Accum: Accumulator<Self>;

    fn from_u64(value: u64) -> Self;

    fn from_bigint(value: &BigInt) -> Self;

    fn from_rational(value: &BigRational) -> Self;

    fn to_f64(&self) -> f64;

    /// Non-negative integer power by exponentiation.
    fn powi(&self, exponent: u64) -> Self;

    /// Equality within the mode tolerance: exact for rationals, within
    /// [`TOLERANCE`] for floats.
    fn close_to(&self, other: &Self) -> bool;

    /// Clamp into `[0, 1]`. Identity for rationals; for floats this absorbs
    /// sub-tolerance excursions produced by cancellation.
    fn clamp01(self) -> Self;

    fn is_exact() -> bool {
        matches!(Self::MODE, ArithmeticMode::Rational)
    }

    /// Sum of an iterator using the mode's accumulator.
    fn sum<I: IntoIterator<Item = Self>>(terms: I) -> Self {
        let mut acc = Self::Accum::default();
        for t in terms {
            acc.push(t);
        }
        acc.total()
    }
}

impl Scalar for f64 {
    const MODE: ArithmeticMode = ArithmeticMode::Float64;

    type Accum = NeumaierSum;

    fn from_u64(value: u64) -> Self {
        value as f64
    }

    fn from_bigint(value: &BigInt) -> Self {
        value.to_f64().unwrap_or(f64::INFINITY)
    }

    fn from_rational(value: &BigRational) -> Self {
        let num = value.numer().to_f64().unwrap_or(f64::INFINITY);
        let den = value.denom().to_f64().unwrap_or(f64::INFINITY);
        num / den
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn powi(&self, exponent: u64) -> Self {
        debug_assert!(exponent <= i32::MAX as u64);
        f64::powi(*self, exponent as i32)
    }

    fn close_to(&self, other: &Self) -> bool {
        (self - other).abs() <= TOLERANCE
    }

    fn clamp01(self) -> Self {
        self.clamp(0.0, 1.0)
    }
}

impl Scalar for BigRational {
    const MODE: ArithmeticMode = ArithmeticMode::Rational;

    type Accum = ExactSum;

    fn from_u64(value: u64) -> Self {
        BigRational::from_integer(BigInt::from(value))
    }

    fn from_bigint(value: &BigInt) -> Self {
        BigRational::from_integer(value.clone())
    }

    fn from_rational(value: &BigRational) -> Self {
        value.clone()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or_else(|| {
            let num = self.numer().to_f64().unwrap_or(f64::INFINITY);
            let den = self.denom().to_f64().unwrap_or(f64::INFINITY);
            num / den
        })
    }

    fn powi(&self, exponent: u64) -> Self {
        num_traits::pow(self.clone(), exponent as usize)
    }

    fn close_to(&self, other: &Self) -> bool {
        self == other
    }

    fn clamp01(self) -> Self {
        if self.is_negative() {
            BigRational::zero()
        } else if self > BigRational::one() {
            BigRational::one()
        } else {
            self
        }
    }
}

/// `a < b` beyond the mode tolerance (strictly less for rationals).
pub fn strictly_below<S: Scalar>(a: &S, b: &S) -> bool {
    if S::is_exact() {
        a < b
    } else {
        (b.clone() - a.clone()).to_f64() > TOLERANCE
    }
}

/// `a >= b` up to the mode tolerance.
pub fn at_least<S: Scalar>(a: &S, b: &S) -> bool {
    !strictly_below(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neumaier_recovers_cancelled_terms() {
        let mut acc = NeumaierSum::default();
        acc.push(1.0);
        acc.push(1e100);
        acc.push(1.0);
        acc.push(-1e100);
        assert_eq!(acc.total(), 2.0);
    }

    #[test]
    fn rational_pow_and_back() {
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        assert_eq!(
            Scalar::powi(&half, 3),
            BigRational::new(BigInt::from(1), BigInt::from(8))
        );
        assert_eq!(Scalar::powi(&half, 0), BigRational::one());
        assert!((Scalar::to_f64(&half) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn tolerance_comparisons() {
        assert!(strictly_below(&0.1_f64, &0.2));
        assert!(!strictly_below(&0.2_f64, &(0.2 + 1e-13)));
        let a = BigRational::new(BigInt::from(1), BigInt::from(3));
        let b = BigRational::new(BigInt::from(1), BigInt::from(2));
        assert!(strictly_below(&a, &b));
        assert!(!strictly_below(&a, &a));
    }
}
