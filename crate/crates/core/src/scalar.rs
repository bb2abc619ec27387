//! Scalar abstraction shared by models, energies and solvers.

use std::fmt::{Debug, Display};

use num_rational::Rational64;
use num_traits::{Float, Num, Signed};

/// Numeric type an Ising model can be expressed in.
///
/// Integers and rationals are exact; floating-point types compare energies
/// against targets with a small relative slack.
pub trait Scalar:
    Num + Signed + Copy + PartialOrd + Debug + Display + Send + Sync + 'static
{
    fn from_int(v: i64) -> Self;
    fn to_f64(self) -> f64;

    /// `self <= target`, allowing rounding slack for inexact types.
    fn reaches(self, target: Self) -> bool {
        self <= target
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

/// Scalars with exact or floating division, so normalization is meaningful.
pub trait Field: Scalar {}

/// Floating-point scalars used by the stochastic solvers.
pub trait Real: Field + Float {
    fn from_f64(v: f64) -> Self;
}

impl Scalar for i64 {
    fn from_int(v: i64) -> Self {
        v
    }
    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Scalar for i32 {
    fn from_int(v: i64) -> Self {
        v as i32
    }
    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Scalar for Rational64 {
    fn from_int(v: i64) -> Self {
        Rational64::from_integer(v)
    }
    fn to_f64(self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}

impl Field for Rational64 {}

macro_rules! float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            fn from_int(v: i64) -> Self {
                v as $t
            }
            fn to_f64(self) -> f64 {
                self as f64
            }
            fn reaches(self, target: Self) -> bool {
                let slack = 64.0 * <$t>::EPSILON * target.abs().max(1.0);
                self <= target + slack
            }
        }
        impl Field for $t {}
        impl Real for $t {
            fn from_f64(v: f64) -> Self {
                v as $t
            }
        }
    };
}

float_scalar!(f32);
float_scalar!(f64);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_types_have_no_slack() {
        assert!(3i64.reaches(3));
        assert!(!4i64.reaches(3));
        let third = Rational64::new(1, 3);
        assert!(third.reaches(third));
        assert!(!(third + Rational64::new(1, 1_000_000)).reaches(third));
    }

    #[test]
    fn floats_absorb_rounding() {
        let a: f64 = (0..30).map(|_| 1.0 / 3.0).sum();
        assert!(a.reaches(10.0));
        assert!(!10.001f64.reaches(10.0));
        assert!(Rational64::new(-7, 2).to_f64() == -3.5);
    }
}
