use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exact::log2_estimate;
use crate::grid::{rat_str, CellAddress, Generator, Grid, GridCell};
use crate::Rational;

/// A nondegenerate closed interval `[a,b] ⊂ [0,1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntervalQuery {
    pub a: Rational,
    pub b: Rational,
}

impl IntervalQuery {
    pub fn new(a: Rational, b: Rational) -> Result<Self> {
        if a.is_negative() || b > Rational::one() || a >= b {
            return Err(Error::InvalidParameter(format!("need 0 <= a < b <= 1, got [{a}, {b}]")));
        }
        Ok(IntervalQuery { a, b })
    }

    /// Parses `"a,b"`.
    pub fn parse(text: &str) -> Result<Self> {
        let (a, b) = text
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("interval {text:?}: expected a,b")))?;
        Self::new(crate::parse_rational(a.trim())?, crate::parse_rational(b.trim())?)
    }

    pub fn of_cell(c: &GridCell) -> Self {
        IntervalQuery { a: c.a.clone(), b: c.b.clone() }
    }

    pub fn measure(&self) -> Rational {
        &self.b - &self.a
    }

    pub fn to_json(&self) -> Value {
        json!({"a": rat_str(&self.a), "b": rat_str(&self.b)})
    }
}

/// Result of a `k0` search: the first level holding a cell with closure inside `[a,b]`.
#[derive(Clone, Debug)]
pub struct K0 {
    pub level: usize,
    /// All level cells inside `[a,b]`, left to right. The first one is the witness.
    pub inside: Vec<GridCell>,
}

impl K0 {
    pub fn witness(&self) -> &GridCell {
        &self.inside[0]
    }
}

/// `k0([a,b])` by descent from the root.
///
/// Above `k0` no cell is inside `[a,b]`, so at most two cells per level meet `(a,b)`; the
/// search therefore costs `O(k0)` cell computations. N-adic grids use a closed form.
pub fn k0_of_interval(grid: &Grid, q: &IntervalQuery) -> Result<K0> {
    if let Generator::NAdic { n } = grid.generator() {
        return k0_nadic(grid, *n, q);
    }
    k0_within(grid, &grid.root(), q)
}

/// `k0` searched below `start`, which must contain every grid cell inside `[a,b]` that
/// is deeper than `start` (for instance a cell containing `[a,b]`).
pub fn k0_within(grid: &Grid, start: &GridCell, q: &IntervalQuery) -> Result<K0> {
    let mut frontier = vec![start.clone()];
    loop {
        let inside: Vec<GridCell> = frontier.iter().filter(|c| c.inside(&q.a, &q.b)).cloned().collect();
        if !inside.is_empty() {
            return Ok(K0 { level: inside[0].level(), inside });
        }
        let level = frontier.first().map(|c| c.level()).unwrap_or(0);
        let mut next = Vec::new();
        for c in &frontier {
            next.extend(grid.children(c)?.into_iter().filter(|k| k.overlaps(&q.a, &q.b)));
        }
        if next.is_empty() {
            return Err(Error::DepthLimit { address: start.address.clone(), limit: grid.depth_limit().max(level) });
        }
        frontier = next;
    }
}

/// `k0([x/den, y/den])` on the `n`-adic grid with integer arithmetic only, returning the
/// level and the index of the leftmost inside cell.
pub(crate) fn k0_nadic_scaled(n: u32, x: &BigInt, y: &BigInt, den: &BigInt, limit: usize) -> Result<(usize, BigInt)> {
    let nb = BigInt::from(n);
    let gap = y - x;
    let bits = (den.bits() as i64 - gap.bits() as i64 - 2).max(0) as f64;
    let mut k = (bits / (n as f64).log2()).floor() as usize;
    let mut pk = num_traits::pow(nb.clone(), k);
    loop {
        if k > limit {
            return Err(Error::DepthLimit { address: CellAddress::root(), limit });
        }
        let lo = (x * &pk).div_ceil(den);
        let hi = (y * &pk).div_floor(den);
        if hi - &lo >= BigInt::one() {
            return Ok((k, lo));
        }
        k += 1;
        pk *= &nb;
    }
}

/// The level-`k` cell with index `j` of the `n`-adic grid.
pub(crate) fn nadic_cell_at(grid: &Grid, n: u32, k: usize, j: &BigInt) -> GridCell {
    let mut c = nadic_cell(n, k, j, &num_traits::pow(BigInt::from(n), k));
    if k >= grid.depth_limit() {
        c.child_count = 0;
    }
    c
}

fn nadic_cell(n: u32, k: usize, j: &BigInt, den: &BigInt) -> GridCell {
    let mut digits = vec![0u8; k];
    let nb = BigInt::from(n);
    let mut x = j.clone();
    for d in digits.iter_mut().rev() {
        let (q, r) = x.div_rem(&nb);
        *d = r.to_u8().unwrap();
        x = q;
    }
    GridCell {
        address: CellAddress::new(digits),
        a: Rational::new(j.clone(), den.clone()),
        b: Rational::new(j + 1, den.clone()),
        child_count: n as usize,
    }
}

/// Level `k` has a cell inside `[a,b]` iff `floor(b n^k) - ceil(a n^k) >= 1`.
fn k0_nadic(grid: &Grid, n: u32, q: &IntervalQuery) -> Result<K0> {
    let len = q.measure();
    // n^-k > b - a rules out level k; start a little below that bound
    let bits = (-log2_estimate(&len) - 2).max(0) as f64;
    let mut k = (bits / (n as f64).log2()).floor() as usize;
    let nb = BigInt::from(n);
    let mut den = num_traits::pow(nb.clone(), k);
    loop {
        if k > grid.depth_limit() {
            return Err(Error::DepthLimit { address: CellAddress::root(), limit: grid.depth_limit() });
        }
        let lo = (&q.a * Rational::from_integer(den.clone())).ceil().to_integer();
        let hi = (&q.b * Rational::from_integer(den.clone())).floor().to_integer();
        if &hi - &lo >= BigInt::one() {
            let mut inside = Vec::new();
            let mut j = lo;
            while &j + 1 <= hi {
                let mut c = nadic_cell(n, k, &j, &den);
                if k >= grid.depth_limit() {
                    c.child_count = 0;
                }
                inside.push(c);
                j += 1;
            }
            return Ok(K0 { level: k, inside });
        }
        k += 1;
        den *= &nb;
    }
}

/// The level-`k0` cells `F1` with closure inside `[a,b]` and `F2`, which adds the
/// neighbouring cell on each side unless the union already reaches `0` or `1`.
#[derive(Clone, Debug)]
pub struct HullFamilies {
    pub k0: usize,
    pub f1: Vec<GridCell>,
    pub f2: Vec<GridCell>,
}

impl HullFamilies {
    /// `(min a, max b)` over a family.
    pub fn span(family: &[GridCell]) -> (Rational, Rational) {
        (family[0].a.clone(), family[family.len() - 1].b.clone())
    }

    /// `#F_i <= 2/lambda_hat + 2`.
    pub fn within_bound(&self, lambda_hat: &Rational) -> bool {
        let bound = Rational::from_integer(2.into()) / lambda_hat + Rational::from_integer(2.into());
        Rational::from_integer(self.f2.len().into()) <= bound && !self.f1.is_empty()
    }

    pub fn to_json(&self) -> Value {
        let fam = |f: &[GridCell]| -> Value { f.iter().map(cell_json).collect() };
        json!({"k0": self.k0, "f1": fam(&self.f1), "f2": fam(&self.f2)})
    }
}

pub(crate) fn cell_json(c: &GridCell) -> Value {
    json!({"address": c.address, "a": rat_str(&c.a), "b": rat_str(&c.b)})
}

pub fn hull_families(grid: &Grid, q: &IntervalQuery) -> Result<HullFamilies> {
    let k = k0_of_interval(grid, q)?;
    let f1 = k.inside;
    let (a1, b1) = HullFamilies::span(&f1);
    let mut f2 = Vec::new();
    if a1.is_positive() {
        f2.push(grid.cell_at(&a1, k.level, true)?);
    }
    f2.extend(f1.iter().cloned());
    if b1 < Rational::one() {
        f2.push(grid.cell_at(&b1, k.level, false)?);
    }
    debug_assert!(f2.iter().all(|c| c.level() == k.level));
    Ok(HullFamilies { k0: k.level, f1, f2 })
}
