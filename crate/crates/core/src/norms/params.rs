use num_traits::{One, Signed};
use serde_json::{json, Value};
use std::fmt;

use crate::error::{Error, Result};
use crate::grid::rat_str;
use crate::{parse_rational, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum QExponent {
    Finite(Rational),
    Infinite,
}

/// Smoothness `s`, integrability `p` and summability `q`, with `0 < s < 1/p`, `p >= 1`, `q >= 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BesovParams {
    pub s: Rational,
    pub p: Rational,
    pub q: QExponent,
}

impl BesovParams {
    pub fn new(s: Rational, p: Rational, q: QExponent) -> Result<Self> {
        if p < Rational::one() {
            return Err(Error::InvalidParameter(format!("p must be at least 1, got {p}")));
        }
        if !s.is_positive() || s >= p.recip() {
            return Err(Error::InvalidParameter(format!("s must lie in (0, 1/p) = (0, {}), got {s}", p.recip())));
        }
        if let QExponent::Finite(q) = &q {
            if q < &Rational::one() {
                return Err(Error::InvalidParameter(format!("q must be at least 1, got {q}")));
            }
        }
        Ok(BesovParams { s, p, q })
    }

    pub fn finite(s: Rational, p: Rational, q: Rational) -> Result<Self> {
        Self::new(s, p, QExponent::Finite(q))
    }

    /// `"s=1/4,p=2,q=2"` in any order, or positional `"1/4,2,2"`; `q` may be `inf`.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(',').map(str::trim).filter(|t| !t.is_empty()).collect();
        let (mut s, mut p, mut q) = (None, None, None);
        for (i, part) in parts.iter().enumerate() {
            let (key, val) = match part.split_once('=') {
                Some((k, v)) => (k.trim(), v.trim()),
                None => (["s", "p", "q"].get(i).copied().unwrap_or("?"), *part),
            };
            match key {
                "s" => s = Some(parse_rational(val)?),
                "p" => p = Some(parse_rational(val)?),
                "q" => q = Some(parse_q(val)?),
                _ => return Err(Error::Parse(format!("unknown parameter {part:?}"))),
            }
        }
        let s = s.ok_or_else(|| Error::Parse("missing s".into()))?;
        let p = p.ok_or_else(|| Error::Parse("missing p".into()))?;
        let q = q.unwrap_or_else(|| QExponent::Finite(p.clone()));
        Self::new(s, p, q)
    }

    /// Exponent of an atom, `s - 1/p`.
    pub fn atom_exponent(&self) -> Rational {
        &self.s - self.p.recip()
    }

    /// `1/p - s`, the exponent turning differences into atomic coefficients.
    pub fn coef_exponent(&self) -> Rational {
        self.p.recip() - &self.s
    }

    pub fn q_finite(&self) -> Option<&Rational> {
        match &self.q {
            QExponent::Finite(q) => Some(q),
            QExponent::Infinite => None,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({"s": rat_str(&self.s), "p": rat_str(&self.p), "q": match &self.q {
            QExponent::Finite(q) => rat_str(q),
            QExponent::Infinite => "inf".to_string(),
        }})
    }
}

fn parse_q(v: &str) -> Result<QExponent> {
    match v {
        "inf" | "infinity" | "∞" => Ok(QExponent::Infinite),
        _ => Ok(QExponent::Finite(parse_rational(v)?)),
    }
}

impl fmt::Display for BesovParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.q {
            QExponent::Finite(q) => write!(f, "s={},p={},q={}", self.s, self.p, q),
            QExponent::Infinite => write!(f, "s={},p={},q=inf", self.s, self.p),
        }
    }
}
