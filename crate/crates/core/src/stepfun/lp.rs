use num_traits::{One, Zero};

use super::StepFunction;
use crate::error::{Error, Result};
use crate::exact::Real;
use crate::grid::CellTree;
use crate::scalar::Scalar;
use crate::Rational;

/// `∫ |f|^p`, exact whenever the powers close up.
pub fn lp_norm_pow<T: Scalar, G: CellTree + ?Sized>(f: &StepFunction<T>, p: &Rational, tree: &G) -> Result<Real> {
    if p < &Rational::one() {
        return Err(Error::InvalidParameter(format!("p must be at least 1, got {p}")));
    }
    let mut acc = Real::zero();
    for (addr, v) in f.pieces() {
        let m = Real::from_rational(tree.measure(addr)?);
        acc = acc.add(&v.abs_pow(p).mul(&m));
    }
    Ok(acc)
}

/// `(∫ |f|^p)^(1/p)`. Exact for rational values and integer `p` when the root is a radical;
/// otherwise an enclosure good to about 60 digits.
pub fn lp_norm<T: Scalar, G: CellTree + ?Sized>(f: &StepFunction<T>, p: &Rational, tree: &G) -> Result<Real> {
    let s = lp_norm_pow(f, p, tree)?;
    if s.as_rational().map_or(false, |r| r.is_zero()) {
        return Ok(Real::zero());
    }
    Ok(s.abs_pow(&p.recip()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{CellAddress, Grid};
    use crate::rat;

    #[test]
    fn l2_of_half_indicator() {
        let g = Grid::nadic(2, 4).unwrap();
        let f: StepFunction<Rational> = StepFunction::indicator(CellAddress::new(vec![0]));
        let n = lp_norm(&f, &rat(2, 1), &g).unwrap();
        assert!(n.is_exact());
        assert_eq!(n.mul(&n).as_rational(), Some(rat(1, 2)));
        let n3 = lp_norm(&f, &rat(3, 1), &g).unwrap();
        assert!((n3.to_f64() - 0.5f64.powf(1.0 / 3.0)).abs() < 1e-15);
    }
}
