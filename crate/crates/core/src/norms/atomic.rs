use std::collections::BTreeMap;

use super::{mixed_norm, BesovParams, NormReport};
use crate::error::Result;
use crate::exact::{Real, Surd};
use crate::grid::{CellAddress, CellTree};
use crate::scalar::{PowScalar, Scalar};
use crate::stepfun::{complement_within, conditional_expectation, martingale_difference, StepFunction};

/// Finitely many coefficients `s_Q`, standing for `Σ s_Q a_Q`.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomicRep<T> {
    pub coeffs: BTreeMap<CellAddress, T>,
}

impl<T> Default for AtomicRep<T> {
    fn default() -> Self {
        AtomicRep { coeffs: BTreeMap::new() }
    }
}

impl<T: Scalar> AtomicRep<T> {
    pub fn new(coeffs: BTreeMap<CellAddress, T>) -> Self {
        AtomicRep { coeffs: coeffs.into_iter().filter(|(_, v)| !v.is_zero()).collect() }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Adds coefficients cell by cell.
    pub fn merge(&mut self, other: &AtomicRep<T>) {
        for (k, v) in &other.coeffs {
            let e = self.coeffs.entry(k.clone()).or_insert_with(T::zero);
            *e = e.clone() + v.clone();
            if e.is_zero() {
                self.coeffs.remove(k);
            }
        }
    }

    pub fn scale(&self, r: &crate::Rational) -> Self {
        AtomicRep::new(self.coeffs.iter().map(|(k, v)| (k.clone(), v.scale(r))).collect())
    }
}

/// `a_Q = |Q|^(s - 1/p) 1_Q`.
pub fn souza_atom<G: CellTree + ?Sized>(q: &CellAddress, params: &BesovParams, tree: &G) -> Result<StepFunction<Surd>> {
    let v = Surd::power(&tree.measure(q)?, &params.atom_exponent())?;
    StepFunction::from_pieces(vec![(q.clone(), v)])
}

/// `(Σ_k (Σ_{Q in level k} |s_Q|^p)^(q/p))^(1/q)`.
pub fn rep_norm<T: Scalar>(rep: &AtomicRep<T>, params: &BesovParams) -> NormReport {
    let mut levels: BTreeMap<usize, Real> = BTreeMap::new();
    for (k, v) in &rep.coeffs {
        let e = levels.entry(k.level()).or_insert_with(Real::zero);
        *e = e.add(&v.abs_pow(&params.p));
    }
    let (value, per_level) = mixed_norm(&levels, params);
    NormReport { method: "rep".into(), params: params.clone(), value, per_level }
}

/// Materializes `Σ s_Q a_Q` on the common refinement of the cells.
pub fn rep_to_function<T: PowScalar, G: CellTree + ?Sized>(
    rep: &AtomicRep<T>,
    params: &BesovParams,
    tree: &G,
) -> Result<StepFunction<T>> {
    let e = params.atom_exponent();
    let keys: Vec<(&CellAddress, &T)> = rep.coeffs.iter().collect();
    let mut stack: Vec<(CellAddress, T)> = Vec::new();
    let mut pieces = BTreeMap::new();
    for (i, (x, s)) in keys.iter().enumerate() {
        while stack.last().map_or(false, |(a, _)| !a.is_prefix_of(x)) {
            stack.pop();
        }
        let inherited = stack.last().map(|(_, v)| v.clone()).unwrap_or_else(T::zero);
        let cum = inherited + s.mul_power(&tree.measure(x)?, &e);
        let mut direct: Vec<&CellAddress> = Vec::new();
        for (y, _) in &keys[i + 1..] {
            if !x.is_prefix_of(y) {
                break;
            }
            if direct.last().map_or(true, |d| !d.is_prefix_of(y)) {
                direct.push(y);
            }
        }
        for c in complement_within(x, &direct, tree)? {
            pieces.insert(c, cum.clone());
        }
        stack.push(((*x).clone(), cum));
    }
    StepFunction::new(pieces)
}

/// Coefficients from martingale differences: `s_Q = (d_k f)|_Q |Q|^(1/p - s)` for `k >= 1`,
/// and the level-0 average for the root.
pub fn greedy_atomic_decomposition<T: PowScalar, G: CellTree + ?Sized>(
    f: &StepFunction<T>,
    params: &BesovParams,
    tree: &G,
) -> Result<AtomicRep<T>> {
    let e = params.coef_exponent();
    let mut coeffs = BTreeMap::new();
    let f0 = conditional_expectation(f, 0, tree)?;
    for (q, v) in f0.pieces() {
        coeffs.insert(q.clone(), v.mul_power(&tree.measure(q)?, &e));
    }
    for k in 1..=f.max_level() {
        for (q, v) in martingale_difference(f, k, tree)?.pieces() {
            debug_assert_eq!(q.level(), k);
            coeffs.insert(q.clone(), v.mul_power(&tree.measure(q)?, &e));
        }
    }
    Ok(AtomicRep::new(coeffs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::norms::QExponent;
    use crate::rat;

    #[test]
    fn two_unit_coefficients() {
        let params = BesovParams::finite(rat(1, 4), rat(2, 1), rat(2, 1)).unwrap();
        let rep: AtomicRep<Surd> = AtomicRep::new(
            [(CellAddress::new(vec![0]), Surd::from_int(1)), (CellAddress::new(vec![1]), Surd::from_int(1))].into(),
        );
        let n = rep_norm(&rep, &params).value;
        assert_eq!(n.mul(&n).as_rational(), Some(rat(2, 1)));
        let inf = BesovParams::new(rat(1, 4), rat(2, 1), QExponent::Infinite).unwrap();
        assert_eq!(rep_norm(&rep, &inf).value, n);
    }

    #[test]
    fn atom_has_unit_scaled_lp_norm() {
        let params = BesovParams::finite(rat(1, 3), rat(2, 1), rat(1, 1)).unwrap();
        let g = Grid::weighted_binary(rat(1, 5), 4).unwrap();
        let q = CellAddress::new(vec![0, 1, 1]);
        let atom = souza_atom(&q, &params, &g).unwrap();
        let pow = crate::stepfun::lp_norm_pow(&atom, &params.p, &g).unwrap();
        let want = Surd::power(&g.measure(&q).unwrap(), &(&params.s * &params.p)).unwrap();
        assert_eq!(pow, Real::Exact(want));
    }

    #[test]
    fn nested_atoms_sum_on_refinement() {
        let params = BesovParams::finite(rat(1, 4), rat(2, 1), rat(2, 1)).unwrap();
        let g = Grid::nadic(2, 4).unwrap();
        let rep: AtomicRep<Surd> = AtomicRep::new(
            [(CellAddress::root(), Surd::from_int(1)), (CellAddress::new(vec![0, 1]), Surd::from_int(2))].into(),
        );
        let f = rep_to_function(&rep, &params, &g).unwrap();
        assert_eq!(f.len(), 3);
        let back = greedy_atomic_decomposition(&f, &params, &g).unwrap();
        let f2 = rep_to_function(&back, &params, &g).unwrap();
        assert!(f.equivalent(&f2, &g).unwrap());
    }
}
