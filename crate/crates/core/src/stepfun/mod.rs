//! Step functions on grid cells and their martingale structure.

mod expectation;
mod io;
mod lp;
mod osc;

pub use expectation::{conditional_expectation, martingale_difference};
pub use io::{atomic_rep_from_json, grid_value, stepfun_from_json, stepfun_to_json};
pub use lp::{lp_norm, lp_norm_pow};
pub use osc::{osc_p, OscMode};


use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::grid::{CellAddress, CellTree};
use crate::scalar::Scalar;
use crate::Rational;

/// A function constant on finitely many pairwise disjoint cells and zero elsewhere.
#[derive(Clone, Debug, PartialEq)]
pub struct StepFunction<T> {
    pieces: BTreeMap<CellAddress, T>,
}

impl<T> Default for StepFunction<T> {
    fn default() -> Self {
        StepFunction { pieces: BTreeMap::new() }
    }
}

impl<T: Scalar> StepFunction<T> {
    /// Builds from cell values, dropping zeros. Fails if two cells are nested.
    pub fn new(pieces: BTreeMap<CellAddress, T>) -> Result<Self> {
        let mut prev: Option<&CellAddress> = None;
        for k in pieces.keys() {
            if let Some(p) = prev {
                if p.is_prefix_of(k) {
                    return Err(Error::OverlappingSupport(p.clone(), k.clone()));
                }
            }
            prev = Some(k);
        }
        Ok(StepFunction { pieces: pieces.into_iter().filter(|(_, v)| !v.is_zero()).collect() })
    }

    pub fn from_pieces<I: IntoIterator<Item = (CellAddress, T)>>(it: I) -> Result<Self> {
        let mut m = BTreeMap::new();
        for (k, v) in it {
            if m.insert(k.clone(), v).is_some() {
                return Err(Error::OverlappingSupport(k.clone(), k));
            }
        }
        Self::new(m)
    }

    pub fn zero() -> Self {
        StepFunction { pieces: BTreeMap::new() }
    }

    pub fn indicator(addr: CellAddress) -> Self {
        let mut pieces = BTreeMap::new();
        pieces.insert(addr, T::one());
        StepFunction { pieces }
    }

    pub fn pieces(&self) -> &BTreeMap<CellAddress, T> {
        &self.pieces
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Deepest support level (0 for the zero function).
    pub fn max_level(&self) -> usize {
        self.pieces.keys().map(|k| k.level()).max().unwrap_or(0)
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> StepFunction<U> {
        StepFunction { pieces: self.pieces.iter().map(|(k, v)| (k.clone(), f(v))).filter(|(_, v)| !v.is_zero()).collect() }
    }

    pub fn scale(&self, r: &Rational) -> Self {
        self.map(|v| v.scale(r))
    }

    /// Value on a cell inside some support cell, `None` if no support cell contains it.
    pub fn value_on(&self, addr: &CellAddress) -> Option<&T> {
        (0..=addr.level()).rev().find_map(|k| self.pieces.get(&addr.prefix(k)))
    }

    /// Support cells below `addr` (inclusive), in order.
    pub fn pieces_below<'a>(&'a self, addr: &'a CellAddress) -> impl Iterator<Item = (&'a CellAddress, &'a T)> + 'a {
        self.pieces.range(addr.clone()..).take_while(move |(k, _)| addr.is_prefix_of(k))
    }

    pub fn integral<G: CellTree + ?Sized>(&self, tree: &G) -> Result<T> {
        let mut acc = T::zero();
        for (k, v) in &self.pieces {
            acc = acc + v.scale(&tree.measure(k)?);
        }
        Ok(acc)
    }

    /// `∫_Q f`.
    pub fn integral_over<G: CellTree + ?Sized>(&self, q: &CellAddress, tree: &G) -> Result<T> {
        if let Some(v) = self.value_on(q) {
            return Ok(v.scale(&tree.measure(q)?));
        }
        let mut acc = T::zero();
        for (k, v) in self.pieces_below(q) {
            acc = acc + v.scale(&tree.measure(k)?);
        }
        Ok(acc)
    }

    pub fn add<G: CellTree + ?Sized>(&self, other: &Self, tree: &G) -> Result<Self> {
        combine(self, other, tree, |a, b| a + b)
    }

    pub fn sub<G: CellTree + ?Sized>(&self, other: &Self, tree: &G) -> Result<Self> {
        combine(self, other, tree, |a, b| a - b)
    }

    /// Pointwise equality, independent of how the cells are split.
    pub fn equivalent<G: CellTree + ?Sized>(&self, other: &Self, tree: &G) -> Result<bool> {
        Ok(self.sub(other, tree)?.is_empty())
    }

    /// The coarsest representation: siblings with a common value are merged into their parent.
    pub fn canonical<G: CellTree + ?Sized>(&self, tree: &G) -> Result<Self> {
        let mut pieces = self.pieces.clone();
        let mut level = self.max_level();
        while level > 0 {
            let parents: Vec<CellAddress> =
                pieces.keys().filter(|k| k.level() == level).filter_map(|k| k.parent()).collect();
            let mut parents = parents;
            parents.dedup();
            for p in parents {
                let n = tree.child_count(&p)?;
                let first = match pieces.get(&p.child(0)) {
                    Some(v) => v.clone(),
                    None => continue,
                };
                if (1..n).all(|d| pieces.get(&p.child(d as u8)) == Some(&first)) {
                    for d in 0..n {
                        pieces.remove(&p.child(d as u8));
                    }
                    pieces.insert(p, first);
                }
            }
            level -= 1;
        }
        Ok(StepFunction { pieces })
    }
}

/// Cells tiling `node` minus the given descendants (sorted, pairwise disjoint).
pub(crate) fn complement_within<G: CellTree + ?Sized>(
    node: &CellAddress,
    inner: &[&CellAddress],
    tree: &G,
) -> Result<Vec<CellAddress>> {
    let mut out = Vec::new();
    let mut stack: Vec<(CellAddress, usize, usize)> = vec![(node.clone(), 0, inner.len())];
    while let Some((n, lo, hi)) = stack.pop() {
        if lo == hi {
            out.push(n);
            continue;
        }
        if inner[lo] == &n {
            continue;
        }
        let cc = tree.child_count(&n)?;
        if cc == 0 {
            return Err(Error::UnknownCell(inner[lo].clone()));
        }
        let mut i = lo;
        let mut children = Vec::with_capacity(cc);
        for d in 0..cc {
            let c = n.child(d as u8);
            let start = i;
            while i < hi && c.is_prefix_of(inner[i]) {
                i += 1;
            }
            children.push((c, start, i));
        }
        stack.extend(children.into_iter().rev());
    }
    out.sort();
    Ok(out)
}

/// Common refinement of two step functions: `(cell, f value, g value)` over the union of supports.
pub(crate) fn overlay<T: Scalar, G: CellTree + ?Sized>(
    f: &StepFunction<T>,
    g: &StepFunction<T>,
    tree: &G,
) -> Result<Vec<(CellAddress, T, T)>> {
    let mut all: Vec<(&CellAddress, bool, &T)> =
        f.pieces.iter().map(|(k, v)| (k, true, v)).chain(g.pieces.iter().map(|(k, v)| (k, false, v))).collect();
    all.sort_by(|a, b| a.0.cmp(b.0).then(b.1.cmp(&a.1)));
    let mut out = Vec::new();
    let mut i = 0;
    while i < all.len() {
        let (x, from_f, vx) = all[i];
        let mut j = i + 1;
        while j < all.len() && x.is_prefix_of(all[j].0) {
            j += 1;
        }
        let inner = &all[i + 1..j];
        let pair = |own: T, other: T| if from_f { (own, other) } else { (other, own) };
        if inner.is_empty() {
            let (a, b) = pair(vx.clone(), T::zero());
            out.push((x.clone(), a, b));
        } else {
            for &(y, _, vy) in inner {
                let (a, b) = pair(vx.clone(), vy.clone());
                out.push((y.clone(), a, b));
            }
            let addrs: Vec<&CellAddress> = inner.iter().map(|t| t.0).collect();
            for c in complement_within(x, &addrs, tree)? {
                let (a, b) = pair(vx.clone(), T::zero());
                out.push((c, a, b));
            }
        }
        i = j;
    }
    Ok(out)
}

pub(crate) fn combine<T: Scalar, G: CellTree + ?Sized>(
    f: &StepFunction<T>,
    g: &StepFunction<T>,
    tree: &G,
    op: impl Fn(T, T) -> T,
) -> Result<StepFunction<T>> {
    let pieces = overlay(f, g, tree)?
        .into_iter()
        .map(|(k, a, b)| (k, op(a, b)))
        .filter(|(_, v)| !v.is_zero())
        .collect();
    Ok(StepFunction { pieces })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::rat;

    fn a(d: &[u8]) -> CellAddress {
        CellAddress::from_slice(d)
    }

    #[test]
    fn nested_support_rejected() {
        let r = StepFunction::from_pieces(vec![(a(&[0]), rat(1, 1)), (a(&[0, 1]), rat(2, 1))]);
        assert!(matches!(r, Err(Error::OverlappingSupport(..))));
    }

    #[test]
    fn overlay_splits_coarse_cells() {
        let g = Grid::nadic(2, 4).unwrap();
        let f = StepFunction::from_pieces(vec![(a(&[0]), rat(1, 1))]).unwrap();
        let h = StepFunction::from_pieces(vec![(a(&[0, 1, 1]), rat(2, 1)), (a(&[1]), rat(3, 1))]).unwrap();
        let s = f.add(&h, &g).unwrap();
        let want = StepFunction::from_pieces(vec![
            (a(&[0, 0]), rat(1, 1)),
            (a(&[0, 1, 0]), rat(1, 1)),
            (a(&[0, 1, 1]), rat(3, 1)),
            (a(&[1]), rat(3, 1)),
        ])
        .unwrap();
        assert_eq!(s, want);
        assert_eq!(s.canonical(&g).unwrap(), s);
        assert!(s.sub(&h, &g).unwrap().equivalent(&f, &g).unwrap());
    }

    #[test]
    fn canonical_merges_equal_siblings() {
        let g = Grid::nadic(2, 4).unwrap();
        let f = StepFunction::from_pieces(vec![(a(&[0, 0]), rat(1, 1)), (a(&[0, 1]), rat(1, 1)), (a(&[1]), rat(1, 1))]).unwrap();
        assert_eq!(f.canonical(&g).unwrap(), StepFunction::indicator(CellAddress::root()));
    }
}
