//! Value types a step function can carry.
//!
//! Grid geometry is always exact. Function values are generic: exact rationals, exact
//! radicals ([`Surd`]) when atoms with fractional exponents are involved, or machine floats
//! for quick approximate work.

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use crate::exact::{Enclosure, Real, Surd};
use crate::Rational;

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn from_rational(r: &Rational) -> Self;

    fn scale(&self, r: &Rational) -> Self {
        self.clone() * Self::from_rational(r)
    }

    fn to_real(&self) -> Real;

    fn abs_pow(&self, e: &Rational) -> Real {
        self.to_real().abs_pow(e)
    }

    /// Text form used in JSON output.
    fn render(&self) -> String;
}

/// Scalars closed under multiplication by rational powers of positive rationals.
pub trait PowScalar: Scalar {
    /// `self * base^e`, `base > 0`.
    fn mul_power(&self, base: &Rational, e: &Rational) -> Self;
}

impl Scalar for BigRational {
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn scale(&self, r: &Rational) -> Self {
        self * r
    }
    fn to_real(&self) -> Real {
        Real::from_rational(self.clone())
    }
    fn render(&self) -> String {
        self.to_string()
    }
}

impl Scalar for Surd {
    fn from_rational(r: &Rational) -> Self {
        Surd::from_rational(r.clone())
    }
    fn scale(&self, r: &Rational) -> Self {
        Surd::scale(self, r)
    }
    fn to_real(&self) -> Real {
        Real::Exact(self.clone())
    }
    fn render(&self) -> String {
        self.to_string()
    }
}

impl PowScalar for Surd {
    fn mul_power(&self, base: &Rational, e: &Rational) -> Self {
        Surd::mul_power(self, base, e).expect("positive base")
    }
}

macro_rules! float_scalar {
    ($t:ty, $bits:expr) => {
        impl Scalar for $t {
            fn from_rational(r: &Rational) -> Self {
                r.to_f64().unwrap_or(f64::NAN) as $t
            }
            fn to_real(&self) -> Real {
                let v = Rational::from_float(*self).unwrap_or_else(Rational::zero);
                let rad = v.abs_ref() * Rational::new(1.into(), num_bigint::BigInt::one() << $bits);
                Real::Approx(Enclosure::new(&v - &rad, &v + &rad))
            }
            fn abs_pow(&self, e: &Rational) -> Real {
                let v = self.abs().powf(e.to_f64().unwrap_or(f64::NAN) as $t);
                v.to_real()
            }
            fn render(&self) -> String {
                format!("{:e}", self)
            }
        }

        impl PowScalar for $t {
            fn mul_power(&self, base: &Rational, e: &Rational) -> Self {
                let b = base.to_f64().unwrap_or(f64::NAN);
                self * (b.powf(e.to_f64().unwrap_or(f64::NAN)) as $t)
            }
        }
    };
}

float_scalar!(f64, 48u32);
float_scalar!(f32, 20u32);

trait AbsRef {
    fn abs_ref(&self) -> Rational;
}

impl AbsRef for Rational {
    fn abs_ref(&self) -> Rational {
        num_traits::Signed::abs(self)
    }
}
