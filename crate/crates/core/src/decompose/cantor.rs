use num_traits::One;
use serde_json::{json, Value};
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::grid::{rat_str, CellAddress, Generator, Grid};
use crate::Rational;

/// Sets with an exact cell membership test on their natural grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AhlforsSet {
    /// The middle-thirds Cantor set on the triadic grid, `alpha = log 2 / log 3`.
    MiddleThirdsCantor,
}

impl AhlforsSet {
    pub fn alpha_f64(&self) -> f64 {
        2f64.ln() / 3f64.ln()
    }

    /// The open triadic cell misses the Cantor set iff its address has a digit 1.
    pub fn cell_disjoint(&self, addr: &CellAddress) -> bool {
        addr.digits().contains(&1)
    }

    /// `|P|^alpha` for a triadic cell, `3^(-k alpha) = 2^(-k)`.
    pub fn cell_power(&self, addr: &CellAddress) -> Rational {
        Rational::one() / Rational::from_integer(num_traits::pow(num_bigint::BigInt::from(2), addr.level()))
    }
}

pub const CANTOR_CELL_GUARD: u64 = 1 << 22;

#[derive(Clone, Debug)]
pub struct CantorReport {
    pub q: CellAddress,
    pub depth: usize,
    /// Maximal triadic cells of `Q ∩ K^c` by level.
    pub families: BTreeMap<usize, Vec<CellAddress>>,
    /// `Σ_{P in F^k} |P|^alpha`.
    pub level_sums: BTreeMap<usize, Rational>,
    /// `|Q|^alpha`.
    pub q_power: Rational,
    /// Largest `level_sum / |Q|^alpha`.
    pub max_ratio: Rational,
}

impl CantorReport {
    pub fn to_json(&self) -> Value {
        let fams: Vec<Value> = self
            .families
            .iter()
            .map(|(k, v)| json!({"level": k, "count": v.len(), "sum": rat_str(&self.level_sums[k]), "cells": v}))
            .collect();
        json!({
            "q": self.q,
            "depth": self.depth,
            "alpha": "log(2)/log(3)",
            "alpha_approx": AhlforsSet::MiddleThirdsCantor.alpha_f64(),
            "q_power": rat_str(&self.q_power),
            "families": fams,
            "max_ratio": rat_str(&self.max_ratio),
        })
    }
}

/// Maximal triadic cells of `Q ∩ K^c` down to `depth`, with per-level sums of `|P|^alpha`.
pub fn cantor_complement_decomposition(grid: &Grid, q: &CellAddress, depth: usize) -> Result<CantorReport> {
    match grid.generator() {
        Generator::NAdic { n: 3 } => {}
        _ => return Err(Error::NotTriadic),
    }
    grid.materialize(q)?;
    let k = AhlforsSet::MiddleThirdsCantor;
    let mut families: BTreeMap<usize, Vec<CellAddress>> = BTreeMap::new();
    if k.cell_disjoint(q) {
        families.insert(q.level(), vec![q.clone()]);
    } else if depth > q.level() {
        let count = 1u64.checked_shl((depth - q.level() - 1) as u32).unwrap_or(u64::MAX);
        if count > CANTOR_CELL_GUARD {
            return Err(Error::Guard(count));
        }
        // words over {0,2} below Q, then a 1
        let mut stems = vec![q.clone()];
        for level in q.level() + 1..=depth {
            families.insert(level, stems.iter().map(|s| s.child(1)).collect());
            if level < depth {
                stems = stems.iter().flat_map(|s| [s.child(0), s.child(2)]).collect();
            }
        }
    }
    let level_sums: BTreeMap<usize, Rational> =
        families.iter().map(|(l, v)| (*l, v.iter().map(|c| k.cell_power(c)).sum())).collect();
    let q_power = k.cell_power(q);
    let max_ratio = level_sums.values().map(|s| s / &q_power).max().unwrap_or_default();
    Ok(CantorReport { q: q.clone(), depth, families, level_sums, q_power, max_ratio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat;

    /// Level-`m` intervals of the Cantor construction.
    fn cantor_level(m: usize) -> Vec<(Rational, Rational)> {
        let mut v = vec![(rat(0, 1), rat(1, 1))];
        for _ in 0..m {
            v = v
                .into_iter()
                .flat_map(|(a, b)| {
                    let t = (&b - &a) / rat(3, 1);
                    [(a.clone(), &a + &t), (&b - &t, b)]
                })
                .collect();
        }
        v
    }

    #[test]
    fn root_families_match_construction() {
        let g = Grid::nadic(3, 8).unwrap();
        let r = cantor_complement_decomposition(&g, &CellAddress::root(), 6).unwrap();
        for (level, cells) in &r.families {
            assert_eq!(cells.len(), 1 << (level - 1));
            assert_eq!(r.level_sums[level], rat(1, 2));
            let kl = cantor_level(*level);
            for c in cells {
                let cell = g.materialize(c).unwrap();
                // interior misses K_level, parent interior meets it
                assert!(kl.iter().all(|(a, b)| !(a < &cell.b && b > &cell.a)));
                let p = g.materialize(&c.parent().unwrap()).unwrap();
                assert!(cantor_level(level - 1).iter().any(|(a, b)| a < &p.b && b > &p.a));
            }
        }
        let l1: Vec<_> = r.families[&1].iter().map(|c| g.materialize(c).unwrap()).map(|c| (c.a, c.b)).collect();
        assert_eq!(l1, vec![(rat(1, 3), rat(2, 3))]);
        let l2: Vec<_> = r.families[&2].iter().map(|c| g.materialize(c).unwrap()).map(|c| (c.a, c.b)).collect();
        assert_eq!(l2, vec![(rat(1, 9), rat(2, 9)), (rat(7, 9), rat(8, 9))]);
    }

    #[test]
    fn self_similar_below_left_third() {
        let g = Grid::nadic(3, 8).unwrap();
        let r = cantor_complement_decomposition(&g, &CellAddress::from_slice(&[0]), 7).unwrap();
        assert_eq!(r.q_power, rat(1, 2));
        assert!(r.level_sums.values().all(|s| s == &rat(1, 4)));
        assert!(matches!(
            cantor_complement_decomposition(&Grid::nadic(2, 3).unwrap(), &CellAddress::root(), 3),
            Err(Error::NotTriadic)
        ));
    }
}
