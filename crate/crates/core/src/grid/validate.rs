use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::{CellAddress, Grid, GridCell};
use crate::error::{Error, Result};
use crate::Rational;

/// Enumeration guard for whole-grid checks.
pub const MAX_VALIDATION_CELLS: u64 = 1 << 24;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelStat {
    pub level: usize,
    pub cells: usize,
    /// Largest cell measure at this level.
    #[serde(with = "crate::json::rat")]
    pub max_measure: Rational,
    /// Smallest cell measure at this level.
    #[serde(with = "crate::json::rat")]
    pub min_measure: Rational,
}

/// Observed constants of a grid up to a depth.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridMeta {
    pub depth: usize,
    /// Smallest child/parent measure ratio.
    #[serde(with = "crate::json::rat")]
    pub lambda_hat: Rational,
    /// Largest child/parent measure ratio.
    #[serde(with = "crate::json::rat")]
    pub lambda: Rational,
    /// Largest measure ratio between adjacent cells of one level.
    #[serde(serialize_with = "crate::json::opt_rat::serialize")]
    pub qs_constant: Option<Rational>,
    pub level_stats: Vec<LevelStat>,
}

fn check_children(parent: &GridCell, kids: &[GridCell]) -> Result<()> {
    let gap = |detail: String| Error::PartitionGap { parent: parent.address.clone(), detail };
    if kids.first().map(|c| &c.a) != Some(&parent.a) {
        return Err(gap("first child does not start at the parent's left end".into()));
    }
    if kids.last().map(|c| &c.b) != Some(&parent.b) {
        return Err(gap("last child does not end at the parent's right end".into()));
    }
    for w in kids.windows(2) {
        if w[0].b != w[1].a {
            return Err(gap(format!("{} ends at {} but {} starts at {}", w[0].address, w[0].b, w[1].address, w[1].a)));
        }
    }
    Ok(())
}

/// Checks nesting, tiling and child ratios level by level, returning the observed constants.
pub fn validate_good_grid(grid: &Grid, depth: usize) -> Result<GridMeta> {
    let mut level = vec![grid.root()];
    let mut lambda_hat: Option<Rational> = None;
    let mut lambda: Option<Rational> = None;
    let mut qs: Option<Rational> = None;
    let mut stats = Vec::new();
    let mut total: u64 = 1;
    for k in 0..=depth {
        let measures: Vec<Rational> = level.iter().map(|c| c.measure()).collect();
        stats.push(LevelStat {
            level: k,
            cells: level.len(),
            max_measure: measures.iter().max().cloned().unwrap_or_else(Rational::zero),
            min_measure: measures.iter().min().cloned().unwrap_or_else(Rational::zero),
        });
        for w in measures.windows(2) {
            let r = if w[0] > w[1] { &w[0] / &w[1] } else { &w[1] / &w[0] };
            if qs.as_ref().map_or(true, |q| &r > q) {
                qs = Some(r);
            }
        }
        if k == depth {
            break;
        }
        let mut next = Vec::new();
        for parent in &level {
            let kids = grid.children(parent)?;
            if kids.is_empty() {
                continue;
            }
            check_children(parent, &kids)?;
            let pm = parent.measure();
            for c in &kids {
                let r = c.measure() / &pm;
                if !r.is_positive() || r >= Rational::one() {
                    return Err(Error::RatioViolation { child: c.address.clone(), ratio: r.to_string() });
                }
                if lambda_hat.as_ref().map_or(true, |l| &r < l) {
                    lambda_hat = Some(r.clone());
                }
                if lambda.as_ref().map_or(true, |l| &r > l) {
                    lambda = Some(r);
                }
            }
            total += kids.len() as u64;
            if total > MAX_VALIDATION_CELLS {
                return Err(Error::Guard(total));
            }
            next.extend(kids);
        }
        if next.is_empty() {
            break;
        }
        level = next;
    }
    let root = grid.root();
    if root.address != CellAddress::root() || !root.a.is_zero() || !root.b.is_one() {
        return Err(Error::PartitionGap { parent: CellAddress::root(), detail: "root is not [0,1]".into() });
    }
    let (lambda_hat, lambda) = match (lambda_hat, lambda) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::InvalidParameter("grid has no children to validate".into())),
    };
    Ok(GridMeta { depth, lambda_hat, lambda, qs_constant: qs, level_stats: stats })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat;
    use std::collections::BTreeMap;

    #[test]
    fn dyadic_constants() {
        let m = validate_good_grid(&Grid::nadic(2, 6).unwrap(), 6).unwrap();
        assert_eq!((m.lambda_hat, m.lambda), (rat(1, 2), rat(1, 2)));
        assert_eq!(m.qs_constant, Some(rat(1, 1)));
        assert_eq!(m.level_stats[6].max_measure, rat(1, 64));
    }

    #[test]
    fn gap_is_reported() {
        let mut cells = BTreeMap::new();
        cells.insert(CellAddress::root(), (rat(0, 1), rat(1, 1)));
        cells.insert(CellAddress::new(vec![0]), (rat(0, 1), rat(1, 3)));
        cells.insert(CellAddress::new(vec![1]), (rat(1, 2), rat(1, 1)));
        let g = Grid::explicit(cells).unwrap();
        assert!(matches!(validate_good_grid(&g, 1), Err(Error::PartitionGap { .. })));
    }

    #[test]
    fn degenerate_child_is_a_ratio_violation() {
        let mut cells = BTreeMap::new();
        cells.insert(CellAddress::root(), (rat(0, 1), rat(1, 1)));
        cells.insert(CellAddress::new(vec![0]), (rat(0, 1), rat(0, 1)));
        cells.insert(CellAddress::new(vec![1]), (rat(0, 1), rat(1, 1)));
        let g = Grid::explicit(cells).unwrap();
        assert!(matches!(validate_good_grid(&g, 1), Err(Error::RatioViolation { .. })));
    }
}
