use num_traits::{One, Zero};
use serde::Serialize;

use super::{validate_good_grid, CellAddress, Generator, Grid, LevelStat};
use crate::error::{Error, Result};
use crate::Rational;

/// Source cells forming regrouped level `k+1` inside the source cell `src` of level `k`:
/// the maximal descendants with measure at most `ratio^(k+1)`. A cell already that small
/// is its own single child.
pub(crate) fn regroup_children(base: &Grid, ratio: &Rational, src: &CellAddress, k: usize) -> Result<Vec<CellAddress>> {
    let t = num_traits::pow(ratio.clone(), k + 1);
    let start = base.materialize(src)?;
    let mut out = Vec::new();
    let mut stack = vec![start];
    while let Some(c) = stack.pop() {
        if c.measure() <= t {
            out.push(c.address);
            continue;
        }
        let kids = base.children(&c)?;
        if kids.is_empty() {
            out.push(c.address);
        }
        stack.extend(kids.into_iter().rev());
    }
    Ok(out)
}

/// Regroups `grid` into the levels `G^k = {P : |P| <= ratio^k < |parent(P)|}`.
///
/// Each `G^k` is an antichain partition. When a child/parent ratio of the source is below
/// `ratio`, a cell can sit in consecutive levels; it then appears as a single child of
/// itself.
pub fn regroup_by_measure(grid: &Grid, depth: usize, ratio: Rational) -> Result<Grid> {
    Grid::regrouped(grid.clone(), ratio, depth)
}

/// Outcome of checking a regrouped grid.
#[derive(Clone, Debug, Serialize)]
pub struct RecalibrationCheck {
    pub depth: usize,
    #[serde(with = "crate::json::rat")]
    pub ratio: Rational,
    pub level_stats: Vec<LevelStat>,
    /// Largest `max_measure / min_measure` over the levels.
    #[serde(with = "crate::json::rat")]
    pub max_level_spread: Rational,
    #[serde(with = "crate::json::rat")]
    pub source_lambda_hat: Rational,
    /// `1 / source_lambda_hat`.
    #[serde(with = "crate::json::rat")]
    pub spread_bound: Rational,
    #[serde(with = "crate::json::rat")]
    pub min_child_ratio: Rational,
    #[serde(with = "crate::json::rat")]
    pub max_child_ratio: Rational,
    /// Cells that occupy more than one consecutive level.
    pub repeated_cells: usize,
    pub partitions_ok: bool,
    pub passed: bool,
}

/// Checks the level partitions of a regrouped grid and the spread bound `l_k/m_k <= 1/lambda_hat`.
pub fn validate_recalibration(grid: &Grid, depth: usize) -> Result<RecalibrationCheck> {
    let (base, ratio) = match grid.generator() {
        Generator::Regrouped { base, ratio } => (base.clone(), ratio.clone()),
        _ => return Err(Error::InvalidParameter("grid is not regrouped".into())),
    };
    let mut level = vec![grid.root()];
    let mut stats = Vec::new();
    let mut spread = Rational::one();
    let mut partitions_ok = true;
    let (mut rmin, mut rmax): (Option<Rational>, Option<Rational>) = (None, None);
    let mut repeats = 0usize;
    let mut deepest_src = 0usize;
    for k in 0..=depth {
        let threshold = num_traits::pow(ratio.clone(), k);
        let mut lo: Option<Rational> = None;
        let mut hi: Option<Rational> = None;
        let mut x = Rational::zero();
        for c in &level {
            let m = c.measure();
            partitions_ok &= c.a == x && m <= threshold;
            x = c.b.clone();
            let src = grid.source_address(&c.address)?;
            deepest_src = deepest_src.max(src.level());
            if let Some(p) = src.parent() {
                partitions_ok &= base.materialize(&p)?.measure() > threshold;
            }
            if lo.as_ref().map_or(true, |v| &m < v) {
                lo = Some(m.clone());
            }
            if hi.as_ref().map_or(true, |v| &m > v) {
                hi = Some(m);
            }
        }
        partitions_ok &= x.is_one();
        let (lo, hi) = (lo.unwrap(), hi.unwrap());
        spread = spread.max(&hi / &lo);
        stats.push(LevelStat { level: k, cells: level.len(), max_measure: hi, min_measure: lo });
        if k == depth {
            break;
        }
        let mut next = Vec::new();
        for c in &level {
            let kids = grid.children(c)?;
            if kids.len() == 1 {
                repeats += 1;
            }
            for kid in &kids {
                let r = kid.measure() / c.measure();
                if rmin.as_ref().map_or(true, |v| &r < v) {
                    rmin = Some(r.clone());
                }
                if rmax.as_ref().map_or(true, |v| &r > v) {
                    rmax = Some(r);
                }
            }
            next.extend(kids);
        }
        level = next;
    }
    // child ratios of these generators do not depend on the level
    let meta_depth = match base.generator() {
        Generator::NAdic { .. } | Generator::WeightedBinary { .. } => 1,
        _ => deepest_src.max(1),
    };
    let src_meta = validate_good_grid(&base, meta_depth)?;
    let bound = src_meta.lambda_hat.recip();
    let passed = partitions_ok && spread <= bound;
    Ok(RecalibrationCheck {
        depth,
        ratio,
        level_stats: stats,
        max_level_spread: spread,
        source_lambda_hat: src_meta.lambda_hat,
        spread_bound: bound,
        min_child_ratio: rmin.unwrap_or_else(Rational::one),
        max_child_ratio: rmax.unwrap_or_else(Rational::one),
        repeated_cells: repeats,
        partitions_ok,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat;

    #[test]
    fn exact_threshold_measure_lands_in_its_own_level() {
        let g = regroup_by_measure(&Grid::nadic(4, 6).unwrap(), 4, rat(1, 2)).unwrap();
        // measure-1/4 cells fill G^1 and again G^2
        let c1 = g.children(&g.root()).unwrap();
        assert_eq!(c1.len(), 4);
        let c2 = g.children(&c1[0]).unwrap();
        assert_eq!(c2.len(), 1);
        assert_eq!(c2[0].measure(), rat(1, 4));
        assert_eq!(g.children(&c2[0]).unwrap().len(), 4);
    }

    #[test]
    fn weighted_spread_bound() {
        let g = regroup_by_measure(&Grid::weighted_binary(rat(1, 5), 10).unwrap(), 8, rat(1, 2)).unwrap();
        let chk = validate_recalibration(&g, 8).unwrap();
        assert!(chk.passed, "{chk:?}");
        assert!(chk.max_level_spread <= rat(5, 1));
    }
}
