use std::collections::{BTreeMap, BTreeSet};

use super::{lq, mixed_norm, BesovParams, LevelValue, NormReport};
use crate::error::Result;
use crate::exact::{Real, Surd};
use crate::grid::{CellAddress, CellTree};
use crate::scalar::Scalar;
use crate::stepfun::{conditional_expectation, lp_norm, martingale_difference, osc_p, OscMode, StepFunction};

/// `(Σ_k (l_k^(-s) |d_k f|_p)^q)^(1/q)` with `l_k` the largest level-`k` measure, plus the
/// term `l_0^(-s) |f_0|_p` when `include_level0`.
pub fn martingale_norm<T: Scalar, G: CellTree + ?Sized>(
    f: &StepFunction<T>,
    params: &BesovParams,
    tree: &G,
    include_level0: bool,
) -> Result<NormReport> {
    let neg_s = -params.s.clone();
    let mut terms = Vec::new();
    let mut per_level = Vec::new();
    let start = if include_level0 { 0 } else { 1 };
    for k in start..=f.max_level() {
        let piece = if k == 0 { conditional_expectation(f, 0, tree)? } else { martingale_difference(f, k, tree)? };
        let weight = Real::Exact(Surd::power(&tree.level_max_measure(k)?, &neg_s)?);
        let t = weight.mul(&lp_norm(&piece, &params.p, tree)?);
        per_level.push(LevelValue { level: k, value: t.clone() });
        terms.push(t);
    }
    Ok(NormReport { method: "martingale".into(), params: params.clone(), value: lq(&terms, &params.q), per_level })
}

/// `(Σ_k (Σ_{Q in level k} |Q|^(-sp) osc_p(f,Q)^p)^(q/p))^(1/q)`.
///
/// Only proper ancestors of support cells can carry oscillation, so only those are visited.
pub fn oscillation_norm<T: Scalar, G: CellTree + ?Sized>(
    f: &StepFunction<T>,
    params: &BesovParams,
    tree: &G,
    mode: OscMode,
) -> Result<NormReport> {
    let mut cells: BTreeSet<CellAddress> = BTreeSet::new();
    for addr in f.pieces().keys() {
        for k in 0..addr.level() {
            cells.insert(addr.prefix(k));
        }
    }
    let weight_exp = -(&params.s * &params.p);
    let mut levels: BTreeMap<usize, Real> = BTreeMap::new();
    for q in &cells {
        let o = osc_p(f, q, &params.p, mode, tree)?;
        let w = Real::Exact(Surd::power(&tree.measure(q)?, &weight_exp)?);
        let term = w.mul(&o.abs_pow(&params.p));
        let e = levels.entry(q.level()).or_insert_with(Real::zero);
        *e = e.add(&term);
    }
    let (value, per_level) = mixed_norm(&levels, params);
    Ok(NormReport { method: "osc".into(), params: params.clone(), value, per_level })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::{rat, Rational};

    #[test]
    fn half_indicator_martingale_norm() {
        let g = Grid::nadic(2, 4).unwrap();
        let params = BesovParams::finite(rat(1, 4), rat(2, 1), rat(2, 1)).unwrap();
        let f: StepFunction<Rational> = StepFunction::indicator(CellAddress::new(vec![0]));
        let n = martingale_norm(&f, &params, &g, true).unwrap().value;
        // (1/4 + 2^(1/2)/4)^(1/2)
        let want = ((0.25f64 + 2f64.sqrt() / 4.0).sqrt() * 1e15).round();
        assert_eq!((n.to_f64() * 1e15).round(), want);
        let sq = n.enclosure().mul(&n.enclosure());
        let exact = crate::exact::Surd::from_rational(rat(1, 4)) + crate::exact::Surd::power(&rat(2, 1), &rat(1, 2)).unwrap().scale(&rat(1, 4));
        assert!(sq.lo <= exact.enclosure().hi && exact.enclosure().lo <= sq.hi);
    }
}
