use std::collections::BTreeMap;

use super::{combine, StepFunction};
use crate::error::{Error, Result};
use crate::grid::CellTree;
use crate::scalar::Scalar;

/// `f_k`: on each level-`k` cell, the average of `f`; cells coarser than `k` are kept as they are.
pub fn conditional_expectation<T: Scalar, G: CellTree + ?Sized>(
    f: &StepFunction<T>,
    k: usize,
    tree: &G,
) -> Result<StepFunction<T>> {
    let mut coarse = BTreeMap::new();
    let mut sums: BTreeMap<_, T> = BTreeMap::new();
    for (addr, v) in f.pieces() {
        if addr.level() <= k {
            coarse.insert(addr.clone(), v.clone());
        } else {
            let anc = addr.prefix(k);
            let add = v.scale(&tree.measure(addr)?);
            let e = sums.entry(anc).or_insert_with(T::zero);
            *e = e.clone() + add;
        }
    }
    for (anc, s) in sums {
        let m = tree.measure(&anc)?;
        coarse.insert(anc, s.scale(&m.recip()));
    }
    StepFunction::new(coarse)
}

/// `d_k f = f_k - f_(k-1)` for `k >= 1`.
pub fn martingale_difference<T: Scalar, G: CellTree + ?Sized>(
    f: &StepFunction<T>,
    k: usize,
    tree: &G,
) -> Result<StepFunction<T>> {
    if k == 0 {
        return Err(Error::InvalidParameter("martingale differences start at k = 1".into()));
    }
    let fk = conditional_expectation(f, k, tree)?;
    let fk1 = conditional_expectation(f, k - 1, tree)?;
    combine(&fk, &fk1, tree, |a, b| a - b)
}
