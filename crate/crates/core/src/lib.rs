//! Dyadic-style function spaces on good grids of the unit interval.
//!
//! A good grid is a nested sequence of interval partitions of `[0,1]` whose children keep a
//! bounded share of their parent's length. On such a grid this crate builds Souza-type
//! atoms, conditional expectations and martingale differences, Haar pair functions, and the
//! associated Besov-type norms, all with exact rational geometry. Irrational powers are kept
//! symbolically ([`Surd`]) and only enclosed numerically ([`Real`]) when no exact form exists.
//!
//! Modules follow the computation pipeline: [`grid`] builds and checks grids, [`stepfun`]
//! handles step functions, [`norms`] evaluates the norms, [`decompose`] produces atomic
//! decompositions of indicators and transfers atoms between grids, and [`exotic`] compares
//! two grids and builds functions whose norms separate them.

pub mod decompose;
pub mod error;
pub mod exact;
pub mod exotic;
pub mod grid;
pub mod json;
pub mod norms;
pub mod sample;
pub mod scalar;
pub mod stepfun;

pub use error::{Error, Result};
pub use exact::{Enclosure, Real, Surd};
pub use grid::{CellAddress, CellTree, Grid, GridCell};
pub use norms::{AtomicRep, BesovParams, HaarCoeffs, NormReport};
pub use scalar::{PowScalar, Scalar};
pub use stepfun::StepFunction;

/// Exact rationals used for all geometry.
pub type Rational = num_rational::BigRational;

pub type ExactStepFunction = StepFunction<Rational>;
pub type SurdStepFunction = StepFunction<Surd>;
pub type StepFunctionF64 = StepFunction<f64>;
pub type StepFunctionF32 = StepFunction<f32>;
pub type SurdAtomicRep = AtomicRep<Surd>;
pub type AtomicRepF64 = AtomicRep<f64>;
pub type SurdHaarCoeffs = HaarCoeffs<Surd>;

/// Parses `"n"`, `"n/d"` or a finite decimal such as `"0.6"` or `"-1.25e-3"` exactly.
pub fn parse_rational(s: &str) -> Result<Rational> {
    use num_bigint::BigInt;
    use num_traits::Zero;
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (ip, fp) = mant.split_once('.').unwrap_or((mant, ""));
    if ip.is_empty() && fp.is_empty() {
        return Err(bad());
    }
    let digits = format!("{ip}{fp}");
    if !digits.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let n: BigInt = digits.parse().map_err(|_| bad())?;
    let scale = exp - fp.len() as i32;
    let ten = BigInt::from(10);
    let mut v = if scale >= 0 {
        Rational::from_integer(n * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(n, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        v = -v;
    }
    Ok(v)
}

/// Shorthand for small rationals in code and tests.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}
