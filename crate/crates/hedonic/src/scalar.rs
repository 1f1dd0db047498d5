//! Scalar abstraction for valuations, utilities and welfare.
//!
//! The game definitions never care what number type they run on, only that
//! it behaves like an ordered field and that it embeds exactly into the
//! rationals. The embedding is what keeps tie-breaking honest: matching
//! tie-breaks and optimality comparisons are carried out in exact arithmetic
//! regardless of the scalar used at the surface.

use std::fmt::{Debug, Display};
use std::ops::{Div, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::Rational;

/// Numbers a hedonic game can be written over.
///
/// `Zero` and `One` bring addition and multiplication; the remaining bounds
/// give subtraction, division, negation and ordering. Every implementor must
/// embed exactly into `Rational` — floats qualify because every finite float
/// is a dyadic rational.
pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialEq
    + PartialOrd
    + Zero
    + One
    + Neg<Output = Self>
    + Sub<Output = Self>
    + Div<Output = Self>
    + 'static
{
    /// The scalar representing the non-negative integer `n`.
    ///
    /// Used for coalition sizes, so it only needs to be exact for small `n`.
    fn from_count(n: usize) -> Self;

    /// Exact embedding into the rationals.
    ///
    /// Panics if the value has no rational meaning (non-finite floats).
    fn to_rational(&self) -> Rational;
}

impl Scalar for Rational {
    fn from_count(n: usize) -> Self {
        Rational::from_integer(BigInt::from(n))
    }

    fn to_rational(&self) -> Rational {
        self.clone()
    }
}

impl Scalar for f64 {
    fn from_count(n: usize) -> Self {
        n as f64
    }

    fn to_rational(&self) -> Rational {
        BigRational::from_float(*self).expect("non-finite f64 has no rational value")
    }
}

impl Scalar for f32 {
    fn from_count(n: usize) -> Self {
        n as f32
    }

    fn to_rational(&self) -> Rational {
        BigRational::from_float(*self).expect("non-finite f32 has no rational value")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_embedding_is_identity() {
        let x = Rational::new(BigInt::from(3), BigInt::from(7));
        assert_eq!(x.to_rational(), x);
    }

    #[test]
    fn float_embedding_is_exact() {
        // 0.5 and -0.25 are dyadic, so the embedding must hit them exactly.
        assert_eq!(0.5f64.to_rational(), Rational::new(1.into(), 2.into()));
        assert_eq!(
            (-0.25f32).to_rational(),
            Rational::new((-1).into(), 4.into())
        );
    }

    #[test]
    fn counts_are_exact() {
        assert_eq!(Rational::from_count(12), Rational::from_integer(12.into()));
        assert_eq!(f64::from_count(7), 7.0);
    }
}
