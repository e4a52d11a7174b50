use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;

use super::StepFunction;
use crate::error::{Error, Result};
use crate::exact::{pow_positive, Enclosure, Real, WORK_PREC};
use crate::grid::{CellAddress, CellTree};
use crate::scalar::Scalar;
use crate::Rational;

/// Which constant the oscillation subtracts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum OscMode {
    /// `inf_c (∫_Q |f - c|^p)^(1/p)`.
    #[default]
    InfOverConstants,
    /// `(∫_Q |f - avg_Q f|^p)^(1/p)`.
    DistanceToAverage,
}

fn cmp_real(a: &Real, b: &Real) -> Ordering {
    a.partial_cmp_value(b).unwrap_or_else(|| a.to_f64().partial_cmp(&b.to_f64()).unwrap_or(Ordering::Equal))
}

fn objective(vals: &[(Real, Rational)], c: &Real, p: &Rational) -> Real {
    let mut acc = Real::zero();
    for (v, m) in vals {
        acc = acc.add(&v.sub(c).abs_pow(p).mul(&Real::from_rational(m.clone())));
    }
    acc
}

fn objective_enclosure(vals: &[(Rational, Rational)], c: &Rational, p: &Rational) -> Enclosure {
    let mut acc = Enclosure::exact(Rational::zero());
    for (v, m) in vals {
        let d = (v - c).abs();
        if d.is_zero() {
            continue;
        }
        acc = acc.add(&pow_positive(&d, p, WORK_PREC).mul(&Enclosure::exact(m.clone())));
    }
    acc
}

fn round_bits(r: &Rational, bits: u32) -> Rational {
    Enclosure::exact(r.clone()).round_out(bits).lo
}

/// `osc_p(f, Q)`.
///
/// For `p = 2` the infimum is attained at the mean and for `p = 1` at a weighted median,
/// both exactly. Other `p` use a golden-section search on the convex objective; the value
/// is then the enclosure at the final point.
pub fn osc_p<T: Scalar, G: CellTree + ?Sized>(
    f: &StepFunction<T>,
    q: &CellAddress,
    p: &Rational,
    mode: OscMode,
    tree: &G,
) -> Result<Real> {
    if p < &Rational::one() {
        return Err(Error::InvalidParameter(format!("p must be at least 1, got {p}")));
    }
    if f.value_on(q).is_some() {
        return Ok(Real::zero());
    }
    let mq = tree.measure(q)?;
    let mut vals: Vec<(Real, Rational)> = Vec::new();
    let mut covered = Rational::zero();
    for (addr, v) in f.pieces_below(q) {
        let m = tree.measure(addr)?;
        covered += &m;
        vals.push((v.to_real(), m));
    }
    if vals.is_empty() {
        return Ok(Real::zero());
    }
    let rest = &mq - &covered;
    if rest.is_positive() {
        vals.push((Real::zero(), rest));
    }
    let mut mean = Real::zero();
    for (v, m) in &vals {
        mean = mean.add(&v.mul(&Real::from_rational(m.clone())));
    }
    let mean = mean.mul(&Real::from_rational(mq.recip()));
    let two = Rational::from_integer(2.into());
    let root = |x: Real| if x.as_rational().map_or(false, |r| r.is_zero()) { Real::zero() } else { x.abs_pow(&p.recip()) };
    if mode == OscMode::DistanceToAverage || p == &two {
        return Ok(root(objective(&vals, &mean, p)));
    }
    if p.is_one() {
        let mut sorted = vals.clone();
        sorted.sort_by(|a, b| cmp_real(&a.0, &b.0));
        let half = &mq / &two;
        let mut acc = Rational::zero();
        let mut median = sorted[0].0.clone();
        for (v, m) in &sorted {
            acc += m;
            if acc >= half {
                median = v.clone();
                break;
            }
        }
        return Ok(objective(&vals, &median, p));
    }
    // general p: golden section on rational approximations of the values
    let approx: Vec<(Rational, Rational)> = vals.iter().map(|(v, m)| (v.enclosure().midpoint(), m.clone())).collect();
    let mut lo = approx.iter().map(|t| t.0.clone()).min().unwrap();
    let mut hi = approx.iter().map(|t| t.0.clone()).max().unwrap();
    let inv_phi = Rational::new(618_033_988_749_894_848i64.into(), 1_000_000_000_000_000_000i64.into());
    let tol = Rational::new(1.into(), num_bigint::BigInt::from(10).pow(32));
    let f_at = |c: &Rational| objective_enclosure(&approx, c, p);
    let mut c1 = round_bits(&(&hi - (&hi - &lo) * &inv_phi), 200);
    let mut c2 = round_bits(&(&lo + (&hi - &lo) * &inv_phi), 200);
    let (mut f1, mut f2) = (f_at(&c1), f_at(&c2));
    for _ in 0..400 {
        if &hi - &lo < tol {
            break;
        }
        if f1.midpoint() < f2.midpoint() {
            hi = c2;
            c2 = c1;
            f2 = f1;
            c1 = round_bits(&(&hi - (&hi - &lo) * &inv_phi), 200);
            f1 = f_at(&c1);
        } else {
            lo = c1;
            c1 = c2;
            f1 = f2;
            c2 = round_bits(&(&lo + (&hi - &lo) * &inv_phi), 200);
            f2 = f_at(&c2);
        }
    }
    let best = if f1.midpoint() < f2.midpoint() { f1 } else { f2 };
    Ok(Real::Approx(best.pow(&p.recip())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::exact::Surd;
    use crate::rat;

    fn step() -> StepFunction<Rational> {
        StepFunction::from_pieces(vec![
            (CellAddress::new(vec![0, 0]), rat(3, 1)),
            (CellAddress::new(vec![0, 1]), rat(1, 1)),
            (CellAddress::new(vec![1, 0]), rat(-1, 1)),
        ])
        .unwrap()
    }

    #[test]
    fn l2_and_l1_closed_forms() {
        let g = Grid::nadic(2, 4).unwrap();
        let f = step();
        // values 3,1,-1,0 each on mass 1/4, mean 3/4
        let o2 = osc_p(&f, &CellAddress::root(), &rat(2, 1), OscMode::InfOverConstants, &g).unwrap();
        let want: Rational = [rat(9, 4), rat(1, 4), rat(7, 4), rat(3, 4)].iter().map(|d| d * d / rat(4, 1)).sum();
        assert_eq!(o2.mul(&o2).as_rational(), Some(want));
        // median 0 (or anything in [0,1]): integral of |f| = 5/4
        let o1 = osc_p(&f, &CellAddress::root(), &rat(1, 1), OscMode::InfOverConstants, &g).unwrap();
        assert_eq!(o1.as_rational(), Some(rat(5, 4)));
        let avg = osc_p(&f, &CellAddress::root(), &rat(1, 1), OscMode::DistanceToAverage, &g).unwrap();
        // |3 - 3/4| + |1 - 3/4| + |-1 - 3/4| + |0 - 3/4| = 5
        assert_eq!(avg.as_rational(), Some(rat(5, 4)));
        let h: StepFunction<Surd> = StepFunction::from_pieces(vec![(CellAddress::from_slice(&[0]), Surd::from_int(1))]).unwrap();
        let d = osc_p(&h, &CellAddress::root(), &rat(1, 1), OscMode::DistanceToAverage, &g).unwrap();
        assert_eq!(d.as_rational(), Some(rat(1, 2)));
        let m = osc_p(&h, &CellAddress::root(), &rat(1, 1), OscMode::InfOverConstants, &g).unwrap();
        assert_eq!(m.as_rational(), Some(rat(1, 2)));
    }

    #[test]
    fn general_p_between_neighbours() {
        let g = Grid::nadic(2, 4).unwrap();
        let f = step();
        let p = rat(3, 2);
        let o = osc_p(&f, &CellAddress::root(), &p, OscMode::InfOverConstants, &g).unwrap().to_f64();
        // brute force over a fine grid of constants
        let vals = [3.0f64, 1.0, -1.0, 0.0];
        let best = (0..=40000)
            .map(|i| -1.0 + 4.0 * i as f64 / 40000.0)
            .map(|c| vals.iter().map(|v| (v - c).abs().powf(1.5) / 4.0).sum::<f64>())
            .fold(f64::INFINITY, f64::min)
            .powf(1.0 / 1.5);
        assert!((o - best).abs() < 1e-8, "{o} vs {best}");
    }
}
