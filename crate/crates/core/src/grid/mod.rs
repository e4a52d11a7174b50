//! Good grids on `[0,1]`: generators, lazy exact materialization, validation, isometric
//! canonicalization of abstract trees, and regrouping by measure.

mod address;
mod canonical;
mod io;
mod pl;
mod regroup;
mod validate;

pub use address::CellAddress;
pub use canonical::{canonicalize_to_interval_grid, AbstractTree};
pub use io::{rat_str, generator_from_json, generator_to_json, grid_from_json, grid_to_json, parse_grid_spec};
pub use pl::PiecewiseLinear;
pub use regroup::{regroup_by_measure, validate_recalibration, RecalibrationCheck};
pub use validate::{validate_good_grid, GridMeta, LevelStat, MAX_VALIDATION_CELLS};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, RwLock};

use crate::error::{Error, Result};
use crate::Rational;

pub const DEFAULT_DEPTH_LIMIT: usize = 512;
pub const DEFAULT_CACHE_DEPTH: usize = 40;

/// Anything with cells addressed by words, each carrying a positive measure.
pub trait CellTree: Sync {
    fn measure(&self, addr: &CellAddress) -> Result<Rational>;
    fn child_count(&self, addr: &CellAddress) -> Result<usize>;
    /// Largest measure among level-`k` cells.
    fn level_max_measure(&self, k: usize) -> Result<Rational>;
}

/// A materialized cell `[a,b]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridCell {
    pub address: CellAddress,
    pub a: Rational,
    pub b: Rational,
    pub child_count: usize,
}

impl GridCell {
    pub fn measure(&self) -> Rational {
        &self.b - &self.a
    }

    pub fn level(&self) -> usize {
        self.address.level()
    }

    /// Closed inclusion `[a,b] ⊂ [lo,hi]`.
    pub fn inside(&self, lo: &Rational, hi: &Rational) -> bool {
        lo <= &self.a && &self.b <= hi
    }

    /// The open cell meets the open interval `(lo,hi)`.
    pub fn overlaps(&self, lo: &Rational, hi: &Rational) -> bool {
        &self.a < hi && &self.b > lo
    }
}

/// How cells are produced.
#[derive(Clone, Debug)]
pub enum Generator {
    NAdic { n: u32 },
    WeightedBinary { a: Rational },
    ExplicitTree { cells: Arc<BTreeMap<CellAddress, (Rational, Rational)>> },
    Image { base: Arc<Grid>, map: PiecewiseLinear },
    Regrouped { base: Arc<Grid>, ratio: Rational },
}

/// A grid with a nominal depth (used for enumeration) and a hard depth limit.
///
/// Cells up to `cache_depth` are cached behind a lock; deeper cells are recomputed on
/// demand so that very deep isolated cells do not fill memory.
pub struct Grid {
    generator: Generator,
    depth: usize,
    depth_limit: usize,
    cache_depth: usize,
    child_counts: HashMap<CellAddress, usize>,
    cache: RwLock<HashMap<CellAddress, GridCell>>,
    sources: RwLock<HashMap<CellAddress, CellAddress>>,
}

impl Clone for Grid {
    fn clone(&self) -> Self {
        Grid {
            generator: self.generator.clone(),
            depth: self.depth,
            depth_limit: self.depth_limit,
            cache_depth: self.cache_depth,
            child_counts: self.child_counts.clone(),
            cache: RwLock::new(HashMap::new()),
            sources: RwLock::new(HashMap::new()),
        }
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("generator", &self.generator)
            .field("depth", &self.depth)
            .field("depth_limit", &self.depth_limit)
            .finish()
    }
}

fn half_open_unit(r: &Rational) -> bool {
    r.is_positive() && r < &Rational::one()
}

impl Grid {
    fn with_generator(generator: Generator, depth: usize) -> Self {
        Grid {
            generator,
            depth,
            depth_limit: DEFAULT_DEPTH_LIMIT.max(depth),
            cache_depth: DEFAULT_CACHE_DEPTH,
            child_counts: HashMap::new(),
            cache: RwLock::new(HashMap::new()),
            sources: RwLock::new(HashMap::new()),
        }
    }

    /// The `n`-adic grid.
    pub fn nadic(n: u32, depth: usize) -> Result<Self> {
        if !(2..=256).contains(&n) {
            return Err(Error::InvalidParameter(format!("n-adic base must lie in 2..=256, got {n}")));
        }
        Ok(Grid::with_generator(Generator::NAdic { n }, depth))
    }

    /// Binary grid whose left child always takes the fraction `a` of its parent.
    pub fn weighted_binary(a: Rational, depth: usize) -> Result<Self> {
        if !half_open_unit(&a) {
            return Err(Error::InvalidParameter(format!("weight must lie in (0,1), got {a}")));
        }
        Ok(Grid::with_generator(Generator::WeightedBinary { a }, depth))
    }

    /// A finite tree given by its cell intervals. The root must be `[0,1]`.
    pub fn explicit(cells: BTreeMap<CellAddress, (Rational, Rational)>) -> Result<Self> {
        let root = cells
            .get(&CellAddress::root())
            .ok_or_else(|| Error::InvalidParameter("explicit tree has no root cell".into()))?;
        if root != &(Rational::zero(), Rational::one()) {
            return Err(Error::InvalidParameter("explicit tree root must be [0,1]".into()));
        }
        let mut child_counts: HashMap<CellAddress, usize> = HashMap::new();
        for addr in cells.keys() {
            if let Some(p) = addr.parent() {
                if !cells.contains_key(&p) {
                    return Err(Error::InvalidParameter(format!("cell {addr} has no parent")));
                }
                let d = *addr.digits().last().unwrap() as usize;
                let c = child_counts.entry(p).or_insert(0);
                *c = (*c).max(d + 1);
            }
        }
        for (p, &c) in &child_counts {
            for d in 0..c {
                if !cells.contains_key(&p.child(d as u8)) {
                    return Err(Error::InvalidParameter(format!("cell {p} misses child {d}")));
                }
            }
        }
        let depth = cells.keys().map(|a| a.level()).max().unwrap_or(0);
        let mut g = Grid::with_generator(Generator::ExplicitTree { cells: Arc::new(cells) }, depth);
        g.child_counts = child_counts;
        Ok(g)
    }

    /// Image of `base` under an increasing piecewise linear homeomorphism.
    pub fn image(base: Grid, map: PiecewiseLinear) -> Self {
        let depth = base.depth;
        let limit = base.depth_limit;
        let mut g = Grid::with_generator(Generator::Image { base: Arc::new(base), map }, depth);
        g.depth_limit = limit;
        g
    }

    pub(crate) fn regrouped(base: Grid, ratio: Rational, depth: usize) -> Result<Self> {
        if !half_open_unit(&ratio) {
            return Err(Error::InvalidParameter(format!("regroup ratio must lie in (0,1), got {ratio}")));
        }
        Ok(Grid::with_generator(Generator::Regrouped { base: Arc::new(base), ratio }, depth))
    }

    pub fn with_depth_limit(mut self, limit: usize) -> Self {
        self.depth_limit = limit;
        self
    }

    pub fn with_cache_depth(mut self, d: usize) -> Self {
        self.cache_depth = d;
        self
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn depth_limit(&self) -> usize {
        self.depth_limit
    }

    pub fn nadic_base(&self) -> Option<u32> {
        match self.generator {
            Generator::NAdic { n } => Some(n),
            _ => None,
        }
    }

    /// Uniform branching number, when every cell has the same number of children.
    pub fn uniform_branching(&self) -> Option<usize> {
        match &self.generator {
            Generator::NAdic { n } => Some(*n as usize),
            Generator::WeightedBinary { .. } => Some(2),
            Generator::Image { base, .. } => base.uniform_branching(),
            _ => None,
        }
    }

    pub fn root(&self) -> GridCell {
        self.materialize(&CellAddress::root()).expect("root cell")
    }

    fn natural_child_count(&self, addr: &CellAddress) -> Result<usize> {
        if addr.level() >= self.depth_limit {
            return Ok(0);
        }
        Ok(match &self.generator {
            Generator::NAdic { n } => *n as usize,
            Generator::WeightedBinary { .. } => 2,
            Generator::ExplicitTree { .. } => self.child_counts.get(addr).copied().unwrap_or(0),
            Generator::Image { base, .. } => base.materialize(addr)?.child_count,
            Generator::Regrouped { base, ratio } => {
                let src = self.source_address(addr)?;
                regroup::regroup_children(base, ratio, &src, addr.level())?.len()
            }
        })
    }

    /// Children of a materialized cell, left to right.
    pub fn children(&self, parent: &GridCell) -> Result<Vec<GridCell>> {
        let level = parent.level() + 1;
        if parent.child_count == 0 {
            return Ok(Vec::new());
        }
        let mk = |i: usize, a: Rational, b: Rational| -> Result<GridCell> {
            let address = parent.address.child(i as u8);
            let child_count = if level >= self.depth_limit {
                0
            } else {
                match &self.generator {
                    Generator::NAdic { n } => *n as usize,
                    Generator::WeightedBinary { .. } => 2,
                    _ => self.natural_child_count(&address)?,
                }
            };
            Ok(GridCell { address, a, b, child_count })
        };
        match &self.generator {
            Generator::NAdic { n } => {
                let len = parent.measure() / Rational::from_integer((*n).into());
                (0..*n as usize)
                    .map(|i| {
                        let a = &parent.a + &len * Rational::from_integer(i.into());
                        let b = &a + &len;
                        mk(i, a, b)
                    })
                    .collect()
            }
            Generator::WeightedBinary { a } => {
                let m = &parent.a + a * parent.measure();
                Ok(vec![mk(0, parent.a.clone(), m.clone())?, mk(1, m, parent.b.clone())?])
            }
            Generator::ExplicitTree { cells } => (0..parent.child_count)
                .map(|i| {
                    let (a, b) = cells[&parent.address.child(i as u8)].clone();
                    mk(i, a, b)
                })
                .collect(),
            Generator::Image { base, map } => {
                let bc = base.materialize(&parent.address)?;
                base.children(&bc)?
                    .into_iter()
                    .enumerate()
                    .map(|(i, c)| mk(i, map.eval(&c.a), map.eval(&c.b)))
                    .collect()
            }
            Generator::Regrouped { base, ratio } => {
                let src = self.source_address(&parent.address)?;
                regroup::regroup_children(base, ratio, &src, parent.level())?
                    .into_iter()
                    .enumerate()
                    .map(|(i, s)| {
                        let c = base.materialize(&s)?;
                        if level <= self.cache_depth {
                            self.sources.write().unwrap().insert(parent.address.child(i as u8), s);
                        }
                        mk(i, c.a, c.b)
                    })
                    .collect()
            }
        }
    }

    /// Source-grid address of a cell of a regrouped grid; identity otherwise.
    pub fn source_address(&self, addr: &CellAddress) -> Result<CellAddress> {
        match &self.generator {
            Generator::Regrouped { base, ratio } => {
                if let Some(s) = self.sources.read().unwrap().get(addr) {
                    return Ok(s.clone());
                }
                let src = match addr.parent() {
                    None => CellAddress::root(),
                    Some(p) => {
                        let ps = self.source_address(&p)?;
                        let d = *addr.digits().last().unwrap() as usize;
                        regroup::regroup_children(base, ratio, &ps, p.level())?
                            .get(d)
                            .cloned()
                            .ok_or_else(|| Error::UnknownCell(addr.clone()))?
                    }
                };
                if addr.level() <= self.cache_depth {
                    self.sources.write().unwrap().insert(addr.clone(), src.clone());
                }
                Ok(src)
            }
            _ => Ok(addr.clone()),
        }
    }

    /// Computes (and caches, when shallow) the cell at `addr`.
    pub fn materialize(&self, addr: &CellAddress) -> Result<GridCell> {
        if addr.level() > self.depth_limit {
            return Err(Error::DepthLimit { address: addr.clone(), limit: self.depth_limit });
        }
        if addr.level() <= self.cache_depth {
            if let Some(c) = self.cache.read().unwrap().get(addr) {
                return Ok(c.clone());
            }
            let cell = match addr.parent() {
                None => GridCell {
                    address: CellAddress::root(),
                    a: Rational::zero(),
                    b: Rational::one(),
                    child_count: self.natural_child_count(addr)?,
                },
                Some(p) => {
                    let parent = self.materialize(&p)?;
                    self.pick_child(&parent, addr)?
                }
            };
            self.cache.write().unwrap().insert(addr.clone(), cell.clone());
            return Ok(cell);
        }
        self.materialize_deep(addr)
    }

    fn pick_child(&self, parent: &GridCell, addr: &CellAddress) -> Result<GridCell> {
        let d = *addr.digits().last().unwrap() as usize;
        if d >= parent.child_count {
            return Err(Error::UnknownCell(addr.clone()));
        }
        if let Generator::WeightedBinary { a } = &self.generator {
            let m = &parent.a + a * parent.measure();
            let (lo, hi) = if d == 0 { (parent.a.clone(), m) } else { (m, parent.b.clone()) };
            let cc = if addr.level() >= self.depth_limit { 0 } else { 2 };
            return Ok(GridCell { address: addr.clone(), a: lo, b: hi, child_count: cc });
        }
        Ok(self.children(parent)?.swap_remove(d))
    }

    /// Unreduced endpoints `x/den, y/den` of a cell of an n-adic or weighted grid, `None`
    /// for other generators.
    pub fn scaled_endpoints(&self, addr: &CellAddress) -> Result<Option<(BigInt, BigInt, BigInt)>> {
        if addr.level() > self.depth_limit {
            return Err(Error::DepthLimit { address: addr.clone(), limit: self.depth_limit });
        }
        let k = addr.level();
        match &self.generator {
            Generator::NAdic { n } => {
                let nb = BigInt::from(*n);
                let mut j = BigInt::zero();
                for &d in addr.digits() {
                    if d as u32 >= *n {
                        return Err(Error::UnknownCell(addr.clone()));
                    }
                    j = j * &nb + BigInt::from(d);
                }
                Ok(Some((j.clone(), j + 1, num_traits::pow(nb, k))))
            }
            Generator::WeightedBinary { a } => {
                let (u, d) = (a.numer().clone(), a.denom().clone());
                let w = &d - &u;
                let (mut x, mut m) = (BigInt::zero(), BigInt::one());
                // runs of equal digits in closed form:
                // t zeros: x <- x d^t, m <- m u^t; t ones: x <- x d^t + m (d^t - w^t), m <- m w^t
                let digits = addr.digits();
                let mut i = 0;
                while i < digits.len() {
                    let digit = digits[i];
                    let t = digits[i..].iter().take_while(|&&e| e == digit).count();
                    let dt = num_traits::pow(d.clone(), t);
                    match digit {
                        0 => {
                            x *= &dt;
                            m *= num_traits::pow(u.clone(), t);
                        }
                        1 => {
                            let wt = num_traits::pow(w.clone(), t);
                            x = x * &dt + &m * (&dt - &wt);
                            m *= wt;
                        }
                        _ => return Err(Error::UnknownCell(addr.clone())),
                    }
                    i += t;
                }
                let y = &x + m;
                Ok(Some((x, y, num_traits::pow(d, k))))
            }
            _ => Ok(None),
        }
    }

    fn materialize_deep(&self, addr: &CellAddress) -> Result<GridCell> {
        let k = addr.level();
        let cc = |n: usize| if k >= self.depth_limit { 0 } else { n };
        match &self.generator {
            Generator::NAdic { n } => {
                let nb = BigInt::from(*n);
                let mut j = BigInt::zero();
                for &d in addr.digits() {
                    if d as u32 >= *n {
                        return Err(Error::UnknownCell(addr.clone()));
                    }
                    j = j * &nb + BigInt::from(d);
                }
                let den = num_traits::pow(nb, k);
                Ok(GridCell {
                    address: addr.clone(),
                    a: Rational::new(j.clone(), den.clone()),
                    b: Rational::new(j + 1, den),
                    child_count: cc(*n as usize),
                })
            }
            Generator::WeightedBinary { .. } => {
                let (x, y, den) = self.scaled_endpoints(addr)?.unwrap();
                Ok(GridCell { address: addr.clone(), a: Rational::new(x, den.clone()), b: Rational::new(y, den), child_count: cc(2) })
            }
            Generator::Image { base, map } => {
                let c = base.materialize(addr)?;
                Ok(GridCell { address: addr.clone(), a: map.eval(&c.a), b: map.eval(&c.b), child_count: c.child_count })
            }
            _ => {
                let mut cell = self.materialize(&addr.prefix(self.cache_depth))?;
                for i in self.cache_depth..k {
                    cell = self.pick_child(&cell, &addr.prefix(i + 1))?;
                }
                Ok(cell)
            }
        }
    }

    /// All cells of level `k`, left to right. Fails past `max_cells`.
    pub fn level_cells(&self, k: usize, max_cells: u64) -> Result<Vec<GridCell>> {
        let mut level = vec![self.root()];
        for _ in 0..k {
            let mut next = Vec::new();
            for c in &level {
                next.extend(self.children(c)?);
                if next.len() as u64 > max_cells {
                    return Err(Error::Guard(next.len() as u64));
                }
            }
            level = next;
        }
        Ok(level)
    }

    /// Largest cell measure at level `k`.
    pub fn max_measure(&self, k: usize) -> Result<Rational> {
        match &self.generator {
            Generator::NAdic { n } => Ok(Rational::new(BigInt::one(), num_traits::pow(BigInt::from(*n), k))),
            Generator::WeightedBinary { a } => {
                let big = if a > &(Rational::one() - a) { a.clone() } else { Rational::one() - a };
                Ok(num_traits::pow(big, k))
            }
            _ => self
                .level_cells(k, MAX_VALIDATION_CELLS)?
                .iter()
                .map(|c| c.measure())
                .max()
                .ok_or_else(|| Error::InvalidParameter(format!("grid has no level {k}"))),
        }
    }

    /// Deepest cell of level `k` containing `x`; ties at shared endpoints go to the
    /// left cell when `from_left`, else to the right cell.
    pub fn cell_at(&self, x: &Rational, k: usize, from_left: bool) -> Result<GridCell> {
        let mut cell = self.root();
        for _ in 0..k {
            let kids = self.children(&cell)?;
            let pick = kids.into_iter().find(|c| {
                if from_left {
                    &c.a < x && x <= &c.b
                } else {
                    &c.a <= x && x < &c.b
                }
            });
            cell = match pick {
                Some(c) => c,
                None => return Err(Error::InvalidParameter(format!("no level-{k} cell at {x}"))),
            };
        }
        Ok(cell)
    }
}

impl CellTree for Grid {
    fn measure(&self, addr: &CellAddress) -> Result<Rational> {
        if addr.level() > self.cache_depth && addr.level() <= self.depth_limit {
            match &self.generator {
                Generator::NAdic { n } if addr.digits().iter().all(|&d| (d as u32) < *n) => {
                    return Ok(Rational::new(BigInt::one(), num_traits::pow(BigInt::from(*n), addr.level())));
                }
                Generator::WeightedBinary { a } if addr.digits().iter().all(|&d| d < 2) => {
                    let ones = addr.digits().iter().filter(|&&d| d == 1).count();
                    let b = Rational::one() - a;
                    return Ok(num_traits::pow(a.clone(), addr.level() - ones) * num_traits::pow(b, ones));
                }
                _ => {}
            }
        }
        Ok(self.materialize(addr)?.measure())
    }

    fn child_count(&self, addr: &CellAddress) -> Result<usize> {
        Ok(self.materialize(addr)?.child_count)
    }

    fn level_max_measure(&self, k: usize) -> Result<Rational> {
        self.max_measure(k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat;

    #[test]
    fn dyadic_cells() {
        let g = Grid::nadic(2, 8).unwrap();
        let c = g.materialize(&CellAddress::new(vec![0, 1, 1])).unwrap();
        assert_eq!((c.a, c.b), (rat(3, 8), rat(1, 2)));
    }

    #[test]
    fn weighted_deep_matches_shallow() {
        let g = Grid::weighted_binary(rat(1, 5), 8).unwrap().with_cache_depth(3);
        let addr = CellAddress::new(vec![1, 0, 1, 1, 0, 0, 1]);
        let deep = g.materialize(&addr).unwrap();
        let shallow = Grid::weighted_binary(rat(1, 5), 8).unwrap().materialize(&addr).unwrap();
        assert_eq!(deep, shallow);
        assert_eq!(deep.measure(), rat(1, 5).pow(3) * rat(4, 5).pow(4));
    }

    #[test]
    fn depth_limit_rejects() {
        let g = Grid::nadic(2, 4).unwrap().with_depth_limit(5);
        assert!(matches!(
            g.materialize(&CellAddress::new(vec![0; 6])),
            Err(Error::DepthLimit { .. })
        ));
    }

    #[test]
    fn image_grid_maps_endpoints() {
        let map = PiecewiseLinear::new(vec![(rat(0, 1), rat(0, 1)), (rat(1, 2), rat(1, 3)), (rat(1, 1), rat(1, 1))]).unwrap();
        let g = Grid::image(Grid::nadic(2, 4).unwrap(), map);
        let c = g.materialize(&CellAddress::new(vec![1, 0])).unwrap();
        assert_eq!((c.a, c.b), (rat(1, 3), rat(2, 3)));
    }

    #[test]
    fn concurrent_materialization_is_consistent() {
        use rayon::prelude::*;
        let g = Grid::weighted_binary(rat(2, 7), 10).unwrap();
        let cells: Vec<GridCell> = (0..512u32)
            .into_par_iter()
            .map(|i| {
                let digits = (0..9).map(|b| ((i >> (8 - b)) & 1) as u8).collect();
                g.materialize(&CellAddress::new(digits)).unwrap()
            })
            .collect();
        for w in cells.windows(2) {
            assert_eq!(w[0].b, w[1].a);
        }
    }
}
