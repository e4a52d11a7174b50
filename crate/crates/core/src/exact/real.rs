use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use std::fmt;

use super::enclosure::{decimal_string, Enclosure};
use super::surd::Surd;
use crate::Rational;

/// A computed real: exact when the algebra closed, otherwise a certified enclosure.
#[derive(Clone, Debug, PartialEq)]
pub enum Real {
    Exact(Surd),
    Approx(Enclosure),
}

impl Real {
    pub fn zero() -> Self {
        Real::Exact(Surd::zero())
    }

    pub fn from_rational(r: Rational) -> Self {
        Real::Exact(Surd::from_rational(r))
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Real::Exact(_))
    }

    pub fn exact(&self) -> Option<&Surd> {
        match self {
            Real::Exact(s) => Some(s),
            Real::Approx(_) => None,
        }
    }

    pub fn as_rational(&self) -> Option<Rational> {
        self.exact().and_then(|s| s.as_rational())
    }

    pub fn enclosure(&self) -> Enclosure {
        match self {
            Real::Exact(s) => s.enclosure(),
            Real::Approx(e) => e.clone(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.enclosure().to_f64()
    }

    pub fn add(&self, o: &Real) -> Real {
        match (self, o) {
            (Real::Exact(a), Real::Exact(b)) => Real::Exact(a + b),
            _ => Real::Approx(self.enclosure().add(&o.enclosure())),
        }
    }

    pub fn sub(&self, o: &Real) -> Real {
        match (self, o) {
            (Real::Exact(a), Real::Exact(b)) => Real::Exact(a - b),
            _ => Real::Approx(self.enclosure().sub(&o.enclosure())),
        }
    }

    pub fn mul(&self, o: &Real) -> Real {
        match (self, o) {
            (Real::Exact(a), Real::Exact(b)) => Real::Exact(a * b),
            _ => Real::Approx(self.enclosure().mul(&o.enclosure())),
        }
    }

    pub fn abs(&self) -> Real {
        match self {
            Real::Exact(s) => Real::Exact(s.abs()),
            Real::Approx(e) => Real::Approx(e.abs()),
        }
    }

    /// `|self|^e`, exact whenever the radical algebra allows it.
    pub fn abs_pow(&self, e: &Rational) -> Real {
        if e.is_one() {
            return self.abs();
        }
        match self {
            Real::Exact(s) => {
                let a = s.abs();
                match a.pow(e) {
                    Ok(v) => Real::Exact(v),
                    Err(_) => Real::Approx(a.enclosure().pow(e)),
                }
            }
            Real::Approx(x) => Real::Approx(x.abs().pow(e)),
        }
    }

    /// Order, or `None` when two enclosures overlap.
    pub fn partial_cmp_value(&self, o: &Real) -> Option<Ordering> {
        if let (Real::Exact(a), Real::Exact(b)) = (self, o) {
            return Some(a.cmp_value(b));
        }
        let (x, y) = (self.enclosure(), o.enclosure());
        if x.certainly_lt(&y) {
            Some(Ordering::Less)
        } else if y.certainly_lt(&x) {
            Some(Ordering::Greater)
        } else if x.is_point() && y.is_point() {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    /// Certified `self <= o`.
    pub fn certainly_le(&self, o: &Real) -> bool {
        match self.partial_cmp_value(o) {
            Some(Ordering::Less) | Some(Ordering::Equal) => true,
            Some(Ordering::Greater) => false,
            None => self.enclosure().certainly_le(&o.enclosure()),
        }
    }

    /// Maximum; overlapping enclosures are joined.
    pub fn max(&self, o: &Real) -> Real {
        match self.partial_cmp_value(o) {
            Some(Ordering::Less) => o.clone(),
            Some(_) => self.clone(),
            None => {
                let (x, y) = (self.enclosure(), o.enclosure());
                Real::Approx(Enclosure::new(x.lo.max(y.lo), x.hi.max(y.hi)))
            }
        }
    }

    pub fn error_bound(&self) -> Rational {
        match self {
            Real::Exact(_) => Rational::zero(),
            Real::Approx(e) => e.radius(),
        }
    }

    /// 50 significant digits.
    pub fn decimal(&self) -> String {
        self.enclosure().decimal(50)
    }

    pub fn error_string(&self) -> String {
        let r = self.error_bound();
        if r.is_zero() {
            "0".into()
        } else {
            decimal_string(&r.abs(), 3)
        }
    }

    /// Exact symbolic form, if any.
    pub fn symbolic(&self) -> Option<String> {
        self.exact().map(|s| s.to_string())
    }
}

impl From<Surd> for Real {
    fn from(s: Surd) -> Self {
        Real::Exact(s)
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Real::Exact(s) => write!(f, "{s}"),
            Real::Approx(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn exact_until_forced() {
        let two = Real::from_rational(r(2, 1));
        let root = two.abs_pow(&r(1, 2));
        assert!(root.is_exact());
        assert_eq!(root.mul(&root).as_rational(), Some(r(2, 1)));
        let s = root.add(&Real::from_rational(r(1, 1))).abs_pow(&r(1, 2));
        assert!(!s.is_exact());
        assert!((s.to_f64() - 1.5537739740300374).abs() < 1e-15);
        assert!(s.error_bound() < r(1, 1_000_000_000_000_000));
    }
}
