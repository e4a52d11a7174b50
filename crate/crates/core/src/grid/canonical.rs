use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use super::{CellAddress, CellTree, Grid};
use crate::error::{Error, Result};
use crate::Rational;

/// A finite rooted tree with a positive measure on every node, children additive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbstractTree {
    #[serde(with = "crate::json::rat")]
    pub measure: Rational,
    #[serde(default)]
    pub children: Vec<AbstractTree>,
}

impl AbstractTree {
    pub fn leaf(measure: Rational) -> Self {
        AbstractTree { measure, children: Vec::new() }
    }

    pub fn node(&self, addr: &CellAddress) -> Result<&AbstractTree> {
        let mut t = self;
        for &d in addr.digits() {
            t = t.children.get(d as usize).ok_or_else(|| Error::UnknownCell(addr.clone()))?;
        }
        Ok(t)
    }

    pub fn depth(&self) -> usize {
        self.children.iter().map(|c| c.depth() + 1).max().unwrap_or(0)
    }

    fn check(&self, addr: &CellAddress) -> Result<()> {
        if !self.measure.is_positive() {
            return Err(Error::MeasureMismatch { address: addr.clone(), detail: "nonpositive measure".into() });
        }
        if self.children.len() == 1 {
            return Err(Error::MeasureMismatch { address: addr.clone(), detail: "single child".into() });
        }
        if !self.children.is_empty() {
            let s: Rational = self.children.iter().map(|c| c.measure.clone()).sum();
            if s != self.measure {
                return Err(Error::MeasureMismatch {
                    address: addr.clone(),
                    detail: format!("children sum to {s}, node has {}", self.measure),
                });
            }
        }
        for (i, c) in self.children.iter().enumerate() {
            c.check(&addr.child(i as u8))?;
        }
        Ok(())
    }

    /// Reads the measures of a grid down to `depth`.
    pub fn from_grid(grid: &Grid, depth: usize) -> Result<Self> {
        fn build(grid: &Grid, cell: &super::GridCell, left: usize) -> Result<AbstractTree> {
            let children = if left == 0 {
                Vec::new()
            } else {
                grid.children(cell)?.iter().map(|c| build(grid, c, left - 1)).collect::<Result<_>>()?
            };
            Ok(AbstractTree { measure: cell.measure(), children })
        }
        build(grid, &grid.root(), depth)
    }
}

impl CellTree for AbstractTree {
    fn measure(&self, addr: &CellAddress) -> Result<Rational> {
        Ok(self.node(addr)?.measure.clone())
    }

    fn child_count(&self, addr: &CellAddress) -> Result<usize> {
        Ok(self.node(addr)?.children.len())
    }

    fn level_max_measure(&self, k: usize) -> Result<Rational> {
        fn walk(t: &AbstractTree, k: usize) -> Option<Rational> {
            if k == 0 {
                return Some(t.measure.clone());
            }
            t.children.iter().filter_map(|c| walk(c, k - 1)).max()
        }
        walk(self, k).ok_or_else(|| Error::InvalidParameter(format!("tree has no level {k}")))
    }
}

/// Lays the tree out on `[0,1]`, each node's children placed left to right by measure.
///
/// Addresses are preserved, so any quantity defined through measures and the tree
/// structure alone is unchanged.
pub fn canonicalize_to_interval_grid(tree: &AbstractTree) -> Result<Grid> {
    if !tree.measure.is_one() {
        return Err(Error::MeasureMismatch { address: CellAddress::root(), detail: "root measure is not 1".into() });
    }
    tree.check(&CellAddress::root())?;
    let mut cells = BTreeMap::new();
    fn place(t: &AbstractTree, addr: CellAddress, a: Rational, out: &mut BTreeMap<CellAddress, (Rational, Rational)>) {
        let b = &a + &t.measure;
        let mut x = a.clone();
        for (i, c) in t.children.iter().enumerate() {
            place(c, addr.child(i as u8), x.clone(), out);
            x += &c.measure;
        }
        out.insert(addr, (a, b));
    }
    place(tree, CellAddress::root(), Rational::zero(), &mut cells);
    Grid::explicit(cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::validate_good_grid;
    use crate::rat;

    #[test]
    fn interval_grid_is_a_fixed_point() {
        let g = Grid::weighted_binary(rat(1, 3), 4).unwrap();
        let t = AbstractTree::from_grid(&g, 4).unwrap();
        let c = canonicalize_to_interval_grid(&t).unwrap();
        for k in 0..=4 {
            let a = g.level_cells(k, 100).unwrap();
            let b = c.level_cells(k, 100).unwrap();
            assert_eq!(a, b.into_iter().map(|mut x| {
                x.child_count = if k == 4 { 2 } else { x.child_count };
                x
            }).collect::<Vec<_>>());
        }
        validate_good_grid(&c, 4).unwrap();
    }

    #[test]
    fn bad_measures_rejected() {
        let t = AbstractTree { measure: rat(1, 1), children: vec![AbstractTree::leaf(rat(1, 2)), AbstractTree::leaf(rat(1, 3))] };
        assert!(matches!(canonicalize_to_interval_grid(&t), Err(Error::MeasureMismatch { .. })));
    }
}
