use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;

use crate::Rational;

/// Working precision, in bits, for irrational values.
pub const WORK_PREC: u32 = 224;

/// A closed interval with rational endpoints known to contain a real number.
#[derive(Clone, Debug, PartialEq)]
pub struct Enclosure {
    pub lo: Rational,
    pub hi: Rational,
}

fn pow2(k: u64) -> BigInt {
    BigInt::one() << k
}

/// floor(v * 2^s)
fn floor_scaled(v: &Rational, s: i64) -> BigInt {
    let (n, d) = (v.numer().clone(), v.denom().clone());
    if s >= 0 {
        (n << s as u64).div_floor(&d)
    } else {
        n.div_floor(&(d << (-s) as u64))
    }
}

fn from_scaled(m: BigInt, s: i64) -> Rational {
    if s >= 0 {
        Rational::new(m, pow2(s as u64))
    } else {
        Rational::from_integer(m << (-s) as u64)
    }
}

/// Rough floor(log2 |v|) for v != 0, correct to within one.
pub(crate) fn log2_estimate(v: &Rational) -> i64 {
    v.numer().bits() as i64 - v.denom().bits() as i64
}

impl Enclosure {
    pub fn exact(v: Rational) -> Self {
        Enclosure { lo: v.clone(), hi: v }
    }

    pub fn new(lo: Rational, hi: Rational) -> Self {
        debug_assert!(lo <= hi);
        Enclosure { lo, hi }
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn midpoint(&self) -> Rational {
        (&self.lo + &self.hi) / Rational::from_integer(2.into())
    }

    pub fn radius(&self) -> Rational {
        (&self.hi - &self.lo) / Rational::from_integer(2.into())
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    pub fn to_f64(&self) -> f64 {
        self.midpoint().to_f64().unwrap_or(f64::NAN)
    }

    /// Widens both endpoints outward to about `prec` significant bits.
    pub fn round_out(&self, prec: u32) -> Self {
        let round = |v: &Rational, up: bool| -> Rational {
            if v.is_zero() {
                return v.clone();
            }
            let s = prec as i64 - log2_estimate(v) + 2;
            let scaled = v * from_scaled(BigInt::one(), -s);
            if scaled.is_integer() {
                return v.clone();
            }
            let mut m = floor_scaled(v, s);
            if up {
                m += 1;
            }
            from_scaled(m, s)
        };
        Enclosure { lo: round(&self.lo, false), hi: round(&self.hi, true) }
    }

    pub fn add(&self, o: &Self) -> Self {
        Enclosure { lo: &self.lo + &o.lo, hi: &self.hi + &o.hi }.round_out(WORK_PREC + 32)
    }

    pub fn neg(&self) -> Self {
        Enclosure { lo: -self.hi.clone(), hi: -self.lo.clone() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.mul_unrounded(o).round_out(WORK_PREC + 32)
    }

    pub fn mul_unrounded(&self, o: &Self) -> Self {
        let c = [&self.lo * &o.lo, &self.lo * &o.hi, &self.hi * &o.lo, &self.hi * &o.hi];
        let lo = c.iter().min().unwrap().clone();
        let hi = c.iter().max().unwrap().clone();
        Enclosure { lo, hi }
    }

    pub fn abs(&self) -> Self {
        if !self.lo.is_negative() {
            self.clone()
        } else if !self.hi.is_positive() {
            self.neg()
        } else {
            let m = if -self.lo.clone() > self.hi { -self.lo.clone() } else { self.hi.clone() };
            Enclosure { lo: Rational::zero(), hi: m }
        }
    }

    /// Encloses `x^e` for every `x` in a nonnegative interval.
    pub fn pow(&self, e: &Rational) -> Self {
        let lo = if self.lo.is_negative() { Rational::zero() } else { self.lo.clone() };
        let hi = if self.hi.is_negative() { Rational::zero() } else { self.hi.clone() };
        if e.is_zero() {
            return Enclosure::exact(Rational::one());
        }
        let at = |x: &Rational| -> Option<Enclosure> {
            if x.is_zero() {
                None
            } else {
                Some(pow_positive(x, e, WORK_PREC))
            }
        };
        if e.is_positive() {
            let l = at(&lo).map_or(Rational::zero(), |p| p.lo);
            let h = at(&hi).map_or(Rational::zero(), |p| p.hi);
            Enclosure { lo: l, hi: h }
        } else {
            assert!(lo.is_positive(), "negative power of an interval touching zero");
            Enclosure { lo: at(&hi).unwrap().lo, hi: at(&lo).unwrap().hi }
        }
    }

    /// Definitely less than `o` (interval disjointness).
    pub fn certainly_lt(&self, o: &Self) -> bool {
        self.hi < o.lo
    }

    pub fn certainly_le(&self, o: &Self) -> bool {
        self.hi <= o.lo
    }

    pub fn decimal(&self, digits: usize) -> String {
        decimal_string(&self.midpoint(), digits)
    }
}

/// Encloses `x^e` for rational `x > 0`, to about `prec` relative bits.
pub fn pow_positive(x: &Rational, e: &Rational, prec: u32) -> Enclosure {
    assert!(x.is_positive(), "pow_positive needs x > 0");
    let (mut n, d) = (e.numer().clone(), e.denom().clone());
    let mut base = x.clone();
    if n.is_negative() {
        base = base.recip();
        n = -n;
    }
    let n = n.to_u32().expect("exponent numerator too large");
    let d = d.to_u32().expect("exponent denominator too large");
    let y = num_traits::pow::Pow::pow(&base, n);
    if d == 1 {
        return Enclosure::exact(y);
    }
    if let (Some(a), Some(b)) = (exact_root(y.numer(), d), exact_root(y.denom(), d)) {
        return Enclosure::exact(Rational::new(a, b));
    }
    let l = log2_estimate(&y);
    let s = prec as i64 - Integer::div_floor(&l, &(d as i64)) + 2;
    let m = floor_scaled(&y, s * d as i64);
    let r = m.nth_root(d);
    if r.pow(d) == m && from_scaled(m.clone(), s * d as i64) == y {
        return Enclosure::exact(from_scaled(r, s));
    }
    Enclosure { lo: from_scaled(r.clone(), s), hi: from_scaled(r + 1, s) }
}

fn exact_root(v: &BigInt, d: u32) -> Option<BigInt> {
    let r = v.nth_root(d);
    (r.pow(d) == *v).then_some(r)
}

/// Decimal rendering with `digits` significant digits, rounded to nearest.
pub fn decimal_string(v: &Rational, digits: usize) -> String {
    if v.is_zero() {
        return "0".to_string();
    }
    let neg = v.is_negative();
    let a = v.abs();
    // e10 ~ floor(log10 a)
    let mut e10 = ((log2_estimate(&a) as f64) * std::f64::consts::LOG10_2).floor() as i64;
    let ten = BigInt::from(10);
    let mantissa = |e: i64| -> BigInt {
        let shift = digits as i64 - 1 - e;
        let scaled = if shift >= 0 {
            &a * Rational::from_integer(ten.pow(shift as u32))
        } else {
            &a / Rational::from_integer(ten.pow((-shift) as u32))
        };
        (scaled + Rational::new(1.into(), 2.into())).floor().to_integer()
    };
    let mut m = mantissa(e10);
    loop {
        let len = m.to_string().len();
        if len > digits {
            e10 += 1;
        } else if len < digits {
            e10 -= 1;
        } else {
            break;
        }
        m = mantissa(e10);
    }
    let ds = m.to_string();
    let ds = ds.trim_end_matches('0');
    let ds = if ds.is_empty() { "0" } else { ds };
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    if (-8..=20).contains(&e10) {
        if e10 >= 0 {
            let int_len = e10 as usize + 1;
            if ds.len() <= int_len {
                out.push_str(ds);
                out.push_str(&"0".repeat(int_len - ds.len()));
            } else {
                out.push_str(&ds[..int_len]);
                out.push('.');
                out.push_str(&ds[int_len..]);
            }
        } else {
            out.push_str("0.");
            out.push_str(&"0".repeat((-e10 - 1) as usize));
            out.push_str(ds);
        }
    } else {
        out.push_str(&ds[..1]);
        if ds.len() > 1 {
            out.push('.');
            out.push_str(&ds[1..]);
        }
        out.push_str(&format!("e{}", e10));
    }
    out
}

impl fmt::Display for Enclosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ± {}", self.decimal(50), decimal_string(&self.radius(), 3))
    }
}


#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn sqrt_two_encloses() {
        let e = pow_positive(&r(2, 1), &r(1, 2), 200);
        assert!(&e.lo * &e.lo < r(2, 1));
        assert!(&e.hi * &e.hi > r(2, 1));
        assert!(e.radius() < Rational::new(1.into(), BigInt::one() << 190u32));
    }

    #[test]
    fn perfect_roots_are_exact() {
        assert!(pow_positive(&r(27, 8), &r(2, 3), 100).is_point());
        assert_eq!(pow_positive(&r(27, 8), &r(-2, 3), 100).lo, r(4, 9));
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(decimal_string(&r(1, 3), 5), "0.33333");
        assert_eq!(decimal_string(&r(2, 1), 5), "2");
        assert_eq!(decimal_string(&r(-125, 1), 2), "-130");
        assert_eq!(decimal_string(&r(1, 1_000_000_000_000), 3), "1e-12");
    }
}
