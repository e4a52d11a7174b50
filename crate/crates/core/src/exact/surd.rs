use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::enclosure::{pow_positive, Enclosure, WORK_PREC};
use super::factor::factor;
use crate::error::{Error, Result};
use crate::Rational;

/// A product of bases raised to exponents in (0,1); the empty product is 1.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Radical(BTreeMap<BigUint, Rational>);

/// An exact real of the form `sum c_i * R_i` with rational `c_i` and distinct radicals `R_i`.
///
/// Bases are kept fully factored when their prime factors are small, which makes the
/// representation canonical, so equality and zero tests are exact.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Surd {
    terms: BTreeMap<Radical, Rational>,
}

fn rat_int(v: BigInt) -> Rational {
    Rational::from_integer(v)
}

fn base_pow(b: &BigUint, k: &BigInt) -> Rational {
    let bi = BigInt::from(b.clone());
    let mag: u64 = num_traits::ToPrimitive::to_u64(&k.abs()).expect("exponent overflow");
    let p = num_traits::pow::Pow::pow(&bi, mag);
    if k.is_negative() {
        Rational::new(BigInt::one(), p)
    } else {
        rat_int(p)
    }
}

/// Adds `e` to the exponent of `b`, moving whole powers into `coef`.
fn absorb(coef: &mut Rational, rad: &mut BTreeMap<BigUint, Rational>, b: BigUint, e: Rational) {
    let total = rad.remove(&b).unwrap_or_else(Rational::zero) + e;
    let whole = total.floor();
    let frac = &total - &whole;
    if !whole.is_zero() {
        *coef *= base_pow(&b, whole.numer());
    }
    if !frac.is_zero() {
        rad.insert(b, frac);
    }
}

impl Radical {
    pub fn one() -> Self {
        Radical(BTreeMap::new())
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> impl Iterator<Item = (&BigUint, &Rational)> {
        self.0.iter()
    }

    fn mul(&self, o: &Radical) -> (Rational, Radical) {
        let mut coef = Rational::one();
        let mut rad = self.0.clone();
        for (b, e) in &o.0 {
            absorb(&mut coef, &mut rad, b.clone(), e.clone());
        }
        (coef, Radical(rad))
    }

    fn enclosure(&self) -> Enclosure {
        let mut acc = Enclosure::exact(Rational::one());
        for (b, e) in &self.0 {
            acc = acc.mul(&pow_positive(&rat_int(BigInt::from(b.clone())), e, WORK_PREC + 16));
        }
        acc
    }
}

/// `(c * R)^e` for a monomial, exact; `c` must be positive unless `e` is an integer.
fn monomial_pow(c: &Rational, r: &Radical, e: &Rational) -> Result<(Rational, Radical)> {
    if c.is_zero() {
        if e.is_positive() {
            return Ok((Rational::zero(), Radical::one()));
        }
        return Err(Error::InvalidParameter("nonpositive power of zero".into()));
    }
    let mut coef = Rational::one();
    let mut rad = BTreeMap::new();
    if e.is_integer() {
        let k = e.to_integer();
        let kk: i32 = num_traits::ToPrimitive::to_i32(&k)
            .ok_or_else(|| Error::InvalidParameter("exponent too large".into()))?;
        coef = num_traits::pow::Pow::pow(c, kk);
    } else {
        if c.is_negative() {
            return Err(Error::NotExact("fractional power of a negative number".into()));
        }
        for (b, k) in factor(&c.numer().magnitude().clone()) {
            absorb(&mut coef, &mut rad, b, e * rat_int(BigInt::from(k)));
        }
        for (b, k) in factor(&c.denom().magnitude().clone()) {
            absorb(&mut coef, &mut rad, b, -(e * rat_int(BigInt::from(k))));
        }
    }
    for (b, x) in &r.0 {
        absorb(&mut coef, &mut rad, b.clone(), x * e);
    }
    Ok((coef, Radical(rad)))
}

impl Surd {
    pub fn zero() -> Self {
        Surd::default()
    }

    pub fn from_rational(r: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !r.is_zero() {
            terms.insert(Radical::one(), r);
        }
        Surd { terms }
    }

    pub fn from_int(v: i64) -> Self {
        Surd::from_rational(rat_int(v.into()))
    }

    /// `base^e` for rational `base > 0`.
    pub fn power(base: &Rational, e: &Rational) -> Result<Self> {
        let (c, r) = monomial_pow(base, &Radical::one(), e)?;
        Ok(Surd::monomial(c, r))
    }

    fn monomial(c: Rational, r: Radical) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(r, c);
        }
        Surd { terms }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Radical, &Rational)> {
        self.terms.iter()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_rational(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&Radical::one()).cloned(),
            _ => None,
        }
    }

    pub fn scale(&self, r: &Rational) -> Self {
        if r.is_zero() {
            return Surd::zero();
        }
        Surd { terms: self.terms.iter().map(|(k, v)| (k.clone(), v * r)).collect() }
    }

    /// `self * base^e` for rational `base > 0`.
    pub fn mul_power(&self, base: &Rational, e: &Rational) -> Result<Self> {
        Ok(self * &Surd::power(base, e)?)
    }

    /// Exact power when the result stays in the representation: monomials, or
    /// nonnegative integer exponents.
    pub fn pow(&self, e: &Rational) -> Result<Self> {
        if self.terms.len() <= 1 {
            let (r, c) = match self.terms.iter().next() {
                Some((r, c)) => (r.clone(), c.clone()),
                None => (Radical::one(), Rational::zero()),
            };
            let (c, r) = monomial_pow(&c, &r, e)?;
            return Ok(Surd::monomial(c, r));
        }
        if e.is_integer() && !e.is_negative() {
            let k: u32 = num_traits::ToPrimitive::to_u32(&e.to_integer())
                .ok_or_else(|| Error::InvalidParameter("exponent too large".into()))?;
            let mut acc = Surd::from_int(1);
            for _ in 0..k {
                acc = &acc * self;
            }
            return Ok(acc);
        }
        Err(Error::NotExact(format!("({self})^({e})")))
    }

    pub fn enclosure(&self) -> Enclosure {
        let mut acc = Enclosure::exact(Rational::zero());
        for (r, c) in &self.terms {
            let t = if r.is_one() { Enclosure::exact(c.clone()) } else { r.enclosure().mul(&Enclosure::exact(c.clone())) };
            acc = acc.add(&t);
        }
        acc
    }

    pub fn to_f64(&self) -> f64 {
        self.enclosure().to_f64()
    }

    /// Sign, decided exactly: a canonical nonzero value has an enclosure avoiding zero.
    pub fn signum(&self) -> i32 {
        if self.is_zero() {
            return 0;
        }
        if let Some(r) = self.as_rational() {
            return if r.is_positive() { 1 } else { -1 };
        }
        if self.terms.len() == 1 {
            let c = self.terms.values().next().unwrap();
            return if c.is_positive() { 1 } else { -1 };
        }
        let e = self.enclosure();
        if e.lo.is_positive() {
            1
        } else if e.hi.is_negative() {
            -1
        } else {
            // Distinct radicals over small primes are linearly independent, so this is rare;
            // fall back on a finer evaluation.
            let mut prec = WORK_PREC * 2;
            loop {
                let mut acc = Enclosure::exact(Rational::zero());
                for (r, c) in &self.terms {
                    let mut t = Enclosure::exact(c.clone());
                    for (b, x) in r.factors() {
                        t = t.mul_unrounded(&pow_positive(&rat_int(BigInt::from(b.clone())), x, prec));
                    }
                    acc = Enclosure::new(&acc.lo + &t.lo, &acc.hi + &t.hi);
                }
                if acc.lo.is_positive() {
                    return 1;
                }
                if acc.hi.is_negative() {
                    return -1;
                }
                assert!(prec < 1 << 16, "cannot decide the sign of {self}");
                prec *= 2;
            }
        }
    }

    pub fn abs(&self) -> Self {
        if self.signum() < 0 {
            -self.clone()
        } else {
            self.clone()
        }
    }

    pub fn cmp_value(&self, o: &Surd) -> Ordering {
        match (self - o).signum() {
            0 => Ordering::Equal,
            s if s < 0 => Ordering::Less,
            _ => Ordering::Greater,
        }
    }

    fn add_term(&mut self, r: Radical, c: Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(r.clone()).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&r);
        }
    }
}

impl Add<&Surd> for &Surd {
    type Output = Surd;
    fn add(self, o: &Surd) -> Surd {
        let mut out = self.clone();
        for (r, c) in &o.terms {
            out.add_term(r.clone(), c.clone());
        }
        out
    }
}

impl Sub<&Surd> for &Surd {
    type Output = Surd;
    fn sub(self, o: &Surd) -> Surd {
        let mut out = self.clone();
        for (r, c) in &o.terms {
            out.add_term(r.clone(), -c.clone());
        }
        out
    }
}

impl Mul<&Surd> for &Surd {
    type Output = Surd;
    fn mul(self, o: &Surd) -> Surd {
        let mut out = Surd::zero();
        for (r1, c1) in &self.terms {
            for (r2, c2) in &o.terms {
                let (k, r) = r1.mul(r2);
                out.add_term(r, k * c1 * c2);
            }
        }
        out
    }
}

impl Add for Surd {
    type Output = Surd;
    fn add(self, o: Surd) -> Surd {
        &self + &o
    }
}

impl Sub for Surd {
    type Output = Surd;
    fn sub(self, o: Surd) -> Surd {
        &self - &o
    }
}

impl Mul for Surd {
    type Output = Surd;
    fn mul(self, o: Surd) -> Surd {
        &self * &o
    }
}

impl Neg for Surd {
    type Output = Surd;
    fn neg(self) -> Surd {
        Surd { terms: self.terms.into_iter().map(|(k, v)| (k, -v)).collect() }
    }
}

impl Zero for Surd {
    fn zero() -> Self {
        Surd::default()
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl One for Surd {
    fn one() -> Self {
        Surd::from_int(1)
    }
}

impl From<Rational> for Surd {
    fn from(r: Rational) -> Self {
        Surd::from_rational(r)
    }
}

impl fmt::Display for Radical {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(b, e)| format!("{b}^({e})")).collect();
        write!(f, "{}", parts.join("*"))
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (r, c) in &self.terms {
            let (sign, mag) = if c.is_negative() { ("-", -c.clone()) } else { ("+", c.clone()) };
            if first {
                if sign == "-" {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            if r.is_one() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{r}")?;
            } else {
                write!(f, "{mag}*{r}")?;
            }
        }
        Ok(())
    }
}

impl std::str::FromStr for Surd {
    type Err = Error;

    /// Parses the `Display` form: terms `c*b^(e)*...` joined by ` + ` or ` - `.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let mut out = Surd::zero();
        let mut rest = s.to_string();
        let mut sign = Rational::one();
        if let Some(r) = rest.strip_prefix('-') {
            sign = -sign;
            rest = r.to_string();
        }
        let mut chunks: Vec<(Rational, String)> = Vec::new();
        let mut cur = String::new();
        let mut cur_sign = sign;
        let tokens: Vec<&str> = rest.split(' ').filter(|t| !t.is_empty()).collect();
        for t in tokens {
            match t {
                "+" | "-" => {
                    chunks.push((cur_sign.clone(), std::mem::take(&mut cur)));
                    cur_sign = if t == "-" { -Rational::one() } else { Rational::one() };
                }
                _ => cur.push_str(t),
            }
        }
        chunks.push((cur_sign, cur));
        for (sg, body) in chunks {
            let mut term = Surd::from_rational(sg);
            for factor in body.split('*') {
                if let Some(idx) = factor.find("^(") {
                    let b = crate::parse_rational(&factor[..idx])?;
                    let e = crate::parse_rational(factor[idx + 2..].trim_end_matches(')'))?;
                    term = term.mul_power(&b, &e)?;
                } else {
                    term = term.scale(&crate::parse_rational(factor)?);
                }
            }
            out = &out + &term;
        }
        Ok(out)
    }
}


#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn powers_cancel_exactly() {
        let a = Surd::power(&r(1, 8), &r(1, 4)).unwrap();
        let b = Surd::power(&r(8, 1), &r(1, 4)).unwrap();
        assert_eq!(&a * &b, Surd::from_int(1));
        let c = Surd::power(&r(4, 9), &r(1, 2)).unwrap();
        assert_eq!(c.as_rational(), Some(r(2, 3)));
    }

    #[test]
    fn sum_of_distinct_radicals_is_not_rational() {
        let s = &Surd::power(&r(2, 1), &r(1, 2)).unwrap() + &Surd::from_int(1);
        assert_eq!(s.term_count(), 2);
        assert!((s.to_f64() - 2.414213562373095).abs() < 1e-14);
        assert_eq!(s.signum(), 1);
        let d = &Surd::power(&r(3, 1), &r(1, 2)).unwrap() - &Surd::power(&r(2, 1), &r(1, 2)).unwrap();
        assert_eq!(d.signum(), 1);
    }

    #[test]
    fn display_round_trip() {
        let s = &Surd::power(&r(12, 5), &r(1, 3)).unwrap() - &Surd::from_rational(r(7, 3));
        let parsed: Surd = s.to_string().parse().unwrap();
        assert_eq!(parsed, s);
    }
}
