use num_traits::Zero;
use serde_json::{json, Value};
use std::collections::BTreeMap;

use super::k0::{cell_json, k0_of_interval, IntervalQuery};
use crate::error::{Error, Result};
use crate::exact::Surd;
use crate::grid::{rat_str, CellAddress, CellTree, Grid, GridCell};
use crate::norms::{AtomicRep, BesovParams};
use crate::Rational;

/// Disjoint families of grid cells indexed by an integer, with the ladder levels when the
/// families come from the two-sided construction.
#[derive(Clone, Debug)]
pub struct FamilyLadder {
    pub k0: usize,
    pub families: BTreeMap<i64, Vec<GridCell>>,
    /// `j_0^+, j_1^+, ...`
    pub j_plus: Vec<usize>,
    /// `j_0^-, j_1^-, ...`
    pub j_minus: Vec<usize>,
    pub target_measure: Rational,
    /// Target measure not covered by the families.
    pub residual: Rational,
}

impl FamilyLadder {
    pub fn cells(&self) -> impl Iterator<Item = &GridCell> {
        self.families.values().flatten()
    }

    pub fn covered_measure(&self) -> Rational {
        self.cells().map(|c| c.measure()).sum()
    }

    /// Pairwise disjointness of the open cells, checked on sorted endpoints.
    pub fn is_disjoint(&self) -> bool {
        let mut v: Vec<&GridCell> = self.cells().collect();
        v.sort_by(|x, y| x.a.cmp(&y.a));
        v.windows(2).all(|w| w[0].b <= w[1].a)
    }

    pub fn max_family_size(&self) -> usize {
        self.families.values().map(Vec::len).max().unwrap_or(0)
    }

    pub fn to_json(&self) -> Value {
        let fams: Vec<Value> = self
            .families
            .iter()
            .map(|(k, cells)| json!({"index": k, "cells": cells.iter().map(cell_json).collect::<Vec<_>>()}))
            .collect();
        json!({
            "k0": self.k0,
            "families": fams,
            "j_plus": self.j_plus,
            "j_minus": self.j_minus,
            "target_measure": rat_str(&self.target_measure),
            "residual": rat_str(&self.residual),
        })
    }
}

/// The two-sided ladder: `F^0` are the level-`j_0` cells inside `[a,b]`; `F^{-i}` are the
/// cells inside `[a, a_{i-1}]` at the first level where there are any, and `F^i` likewise
/// on `[b_{i-1}, b]`. Each side stops after `max_steps` families or when it closes up.
pub fn interval_partition_families(grid: &Grid, q: &IntervalQuery, max_steps: usize) -> Result<FamilyLadder> {
    let first = k0_of_interval(grid, q)?;
    let j0 = first.level;
    let mut families = BTreeMap::new();
    let (mut left, mut right) = (first.inside[0].a.clone(), first.inside[first.inside.len() - 1].b.clone());
    families.insert(0i64, first.inside);
    let (mut j_plus, mut j_minus) = (vec![j0], vec![j0]);
    for i in 1..=max_steps {
        if left == q.a {
            break;
        }
        let k = k0_of_interval(grid, &IntervalQuery::new(q.a.clone(), left.clone())?)?;
        debug_assert!(k.level > *j_minus.last().unwrap());
        left = k.inside[0].a.clone();
        j_minus.push(k.level);
        families.insert(-(i as i64), k.inside);
    }
    for i in 1..=max_steps {
        if right == q.b {
            break;
        }
        let k = k0_of_interval(grid, &IntervalQuery::new(right.clone(), q.b.clone())?)?;
        debug_assert!(k.level > *j_plus.last().unwrap());
        right = k.inside[k.inside.len() - 1].b.clone();
        j_plus.push(k.level);
        families.insert(i as i64, k.inside);
    }
    let residual = (&left - &q.a) + (&q.b - &right);
    Ok(FamilyLadder { k0: j0, families, j_plus, j_minus, target_measure: q.measure(), residual })
}

/// A set to be exhausted by maximal grid cells.
#[derive(Clone, Debug)]
pub enum Target {
    Interval(IntervalQuery),
    /// A union of cells of the same grid, given as an antichain of addresses.
    Cells(Vec<CellAddress>),
}

enum Cover {
    Inside,
    Outside,
    Partial,
}

struct Classifier {
    target: Target,
    cells: BTreeMap<CellAddress, Rational>,
    measure: Rational,
}

impl Classifier {
    fn new(grid: &Grid, target: &Target) -> Result<Self> {
        let mut cells = BTreeMap::new();
        let measure = match target {
            Target::Interval(q) => q.measure(),
            Target::Cells(v) => {
                for c in v {
                    cells.insert(c.clone(), grid.measure(c)?);
                }
                let keys: Vec<&CellAddress> = cells.keys().collect();
                if let Some(w) = keys.windows(2).find(|w| w[0].is_prefix_of(w[1])) {
                    return Err(Error::OverlappingSupport(w[0].clone(), w[1].clone()));
                }
                cells.values().sum()
            }
        };
        if measure.is_zero() {
            return Err(Error::InvalidParameter("target has zero measure".into()));
        }
        Ok(Classifier { target: target.clone(), cells, measure })
    }

    fn classify(&self, c: &GridCell) -> Cover {
        match &self.target {
            Target::Interval(q) => {
                if c.inside(&q.a, &q.b) {
                    Cover::Inside
                } else if c.overlaps(&q.a, &q.b) {
                    Cover::Partial
                } else {
                    Cover::Outside
                }
            }
            Target::Cells(_) => {
                if (0..=c.level()).any(|l| self.cells.contains_key(&c.address.prefix(l))) {
                    return Cover::Inside;
                }
                let below: Rational = match c.address.subtree_end() {
                    Some(end) => self.cells.range(c.address.clone()..end).map(|(_, m)| m.clone()).sum(),
                    None => self.cells.values().sum(),
                };
                if below.is_zero() {
                    Cover::Outside
                } else if below == c.measure() {
                    Cover::Inside
                } else {
                    Cover::Partial
                }
            }
        }
    }
}

/// Maximal cells inside the target (their parent is not inside), by level, down to `depth`.
pub fn maximal_families(grid: &Grid, target: &Target, depth: usize) -> Result<FamilyLadder> {
    let cls = Classifier::new(grid, target)?;
    let mut families: BTreeMap<i64, Vec<GridCell>> = BTreeMap::new();
    let mut partial = vec![grid.root()];
    let mut k0 = None;
    for level in 0..=depth {
        let mut next = Vec::new();
        let mut fam = Vec::new();
        for c in partial {
            match cls.classify(&c) {
                Cover::Inside => fam.push(c),
                Cover::Outside => {}
                Cover::Partial => next.push(c),
            }
        }
        if !fam.is_empty() {
            k0.get_or_insert(level);
            families.insert(level as i64, fam);
        }
        if level == depth || next.is_empty() {
            break;
        }
        partial = Vec::new();
        for c in &next {
            partial.extend(grid.children(c)?);
        }
    }
    let covered: Rational = families.values().flatten().map(|c| c.measure()).sum();
    Ok(FamilyLadder {
        k0: k0.unwrap_or(depth + 1),
        families,
        j_plus: Vec::new(),
        j_minus: Vec::new(),
        residual: &cls.measure - covered,
        target_measure: cls.measure,
    })
}

/// Exponential fit `sum_k ≈ C r^k` over the nonzero sums with `from <= k <= to`; returns `r`.
pub fn fitted_decay_ratio(sums: &BTreeMap<usize, f64>, from: usize, to: usize) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        sums.range(from..=to).filter(|(_, v)| **v > 0.0).map(|(k, v)| (*k as f64, v.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Some((sxy / sxx).exp())
}

/// `1_T = Σ_P |P|^(1/p - s) a_P` over the maximal cells `P` of the target.
#[derive(Clone, Debug)]
pub struct IndicatorDecomposition {
    pub ladder: FamilyLadder,
    pub rep: AtomicRep<Surd>,
    /// `Σ_{P in F^k} |P|^(1 - sp)` per level.
    pub level_sums: BTreeMap<usize, Surd>,
    pub fitted_ratio: Option<f64>,
}

impl IndicatorDecomposition {
    pub fn level_sums_f64(&self) -> BTreeMap<usize, f64> {
        self.level_sums.iter().map(|(k, v)| (*k, v.to_f64())).collect()
    }

    pub fn to_json(&self) -> Value {
        let sums: Vec<Value> = self
            .level_sums
            .iter()
            .map(|(k, v)| json!({"level": k, "sum": v.to_string(), "approx": v.to_f64()}))
            .collect();
        let coeffs: Vec<Value> =
            self.rep.coeffs.iter().map(|(k, v)| json!({"address": k, "coefficient": v.to_string()})).collect();
        json!({
            "ladder": self.ladder.to_json(),
            "coefficients": coeffs,
            "level_sums": sums,
            "fitted_ratio": self.fitted_ratio,
        })
    }
}

pub fn indicator_decomposition(
    grid: &Grid,
    target: &Target,
    params: &BesovParams,
    depth: usize,
) -> Result<IndicatorDecomposition> {
    let ladder = maximal_families(grid, target, depth)?;
    let e_coef = params.coef_exponent();
    let e_sum = Rational::from_integer(1.into()) - &params.s * &params.p;
    let mut coeffs = BTreeMap::new();
    let mut level_sums = BTreeMap::new();
    for (k, fam) in &ladder.families {
        let mut sum = Surd::zero();
        for c in fam {
            let m = c.measure();
            coeffs.insert(c.address.clone(), Surd::power(&m, &e_coef)?);
            sum = sum + Surd::power(&m, &e_sum)?;
        }
        level_sums.insert(*k as usize, sum);
    }
    let mut out = IndicatorDecomposition { ladder, rep: AtomicRep::new(coeffs), level_sums, fitted_ratio: None };
    let k0 = out.ladder.k0;
    out.fitted_ratio = fitted_decay_ratio(&out.level_sums_f64(), k0, depth);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::rep_to_function;
    use crate::rat;
    use crate::stepfun::StepFunction;

    #[test]
    fn cell_target_is_one_atom() {
        let g = Grid::weighted_binary(rat(1, 3), 6).unwrap();
        let q = CellAddress::from_slice(&[1, 0]);
        let params = BesovParams::finite(rat(1, 4), rat(2, 1), rat(2, 1)).unwrap();
        let d = indicator_decomposition(&g, &Target::Cells(vec![q.clone()]), &params, 6).unwrap();
        assert_eq!(d.rep.coeffs.len(), 1);
        let m = g.measure(&q).unwrap();
        assert_eq!(d.rep.coeffs[&q], Surd::power(&m, &rat(1, 4)).unwrap());
        assert!(d.ladder.residual.is_zero());
    }

    #[test]
    fn sibling_cells_merge_into_parent() {
        let g = Grid::nadic(2, 6).unwrap();
        let t = Target::Cells(vec![CellAddress::from_slice(&[0, 0]), CellAddress::from_slice(&[0, 1]), CellAddress::from_slice(&[1, 1, 0])]);
        let l = maximal_families(&g, &t, 6).unwrap();
        let addrs: Vec<CellAddress> = l.cells().map(|c| c.address.clone()).collect();
        assert_eq!(addrs, vec![CellAddress::from_slice(&[0]), CellAddress::from_slice(&[1, 1, 0])]);
    }

    /// maximal dyadic cells of [1/3, 1] read off the binary expansion 1/3 = 0.0101...
    #[test]
    fn one_third_expansion() {
        let g = Grid::nadic(2, 30).unwrap();
        let q = IntervalQuery::new(rat(1, 3), rat(1, 1)).unwrap();
        let l = maximal_families(&g, &Target::Interval(q.clone()), 21).unwrap();
        let mut want = vec![(1usize, rat(1, 2), rat(1, 1))];
        // [x_k, x_k + 2^-k] with x the truncations of 1/3 from above
        let mut hi = rat(1, 2);
        for k in (3..=21).step_by(2) {
            let lo = &hi - rat(1, 1 << k);
            want.push((k, lo.clone(), hi.clone()));
            hi = lo;
        }
        let got: Vec<(usize, Rational, Rational)> = l.cells().map(|c| (c.level(), c.a.clone(), c.b.clone())).collect();
        assert_eq!(got, want);
        assert!(l.families.values().all(|f| f.len() <= 2));
        let ladder = interval_partition_families(&g, &q, 10).unwrap();
        let got2: Vec<(usize, Rational, Rational)> = {
            let mut v: Vec<_> = ladder.cells().map(|c| (c.level(), c.a.clone(), c.b.clone())).collect();
            v.sort_by(|x, y| x.0.cmp(&y.0));
            v
        };
        assert_eq!(got2, want[..11].to_vec());
        assert!(ladder.residual <= rat(1, 2).pow(10) * q.measure());
        assert_eq!(&ladder.residual + ladder.covered_measure(), q.measure());
    }

    #[test]
    fn indicator_reconstructs_and_decays() {
        let g = Grid::nadic(2, 24).unwrap();
        let q = IntervalQuery::new(rat(1, 3), rat(3, 4)).unwrap();
        let params = BesovParams::finite(rat(1, 4), rat(2, 1), rat(2, 1)).unwrap();
        let d = indicator_decomposition(&g, &Target::Interval(q.clone()), &params, 24).unwrap();
        assert!(d.ladder.is_disjoint());
        assert!(d.ladder.residual <= rat(1, 1 << 23));
        let f = rep_to_function(&d.rep, &params, &g).unwrap();
        let ones: StepFunction<Surd> =
            StepFunction::from_pieces(d.ladder.cells().map(|c| (c.address.clone(), Surd::from_int(1)))).unwrap();
        assert!(f.equivalent(&ones, &g).unwrap());
        let r = fitted_decay_ratio(&d.level_sums_f64(), d.ladder.k0, d.ladder.k0 + 16).unwrap();
        assert!((r - 0.5f64.sqrt()).abs() < 0.02, "{r}");
    }

    #[test]
    fn maximality_and_family_bounds_on_weighted_samples() {
        use rand::Rng;
        let g = Grid::weighted_binary(rat(1, 5), 40).unwrap();
        let mut r = crate::sample::rng(11);
        for _ in 0..100 {
            let a = rat(r.gen_range(0..900), 1000);
            let b = &a + rat(r.gen_range(1..=100), 1000);
            let q = IntervalQuery::new(a, b).unwrap();
            let ladder = interval_partition_families(&g, &q, 6).unwrap();
            assert!(ladder.is_disjoint());
            // #F^k <= 2 / lambda_hat
            assert!(ladder.max_family_size() <= 10);
            let l = maximal_families(&g, &Target::Interval(q.clone()), 20).unwrap();
            for c in l.cells() {
                let parent = g.materialize(&c.address.parent().unwrap()).unwrap();
                assert!(!parent.inside(&q.a, &q.b));
            }
        }
    }
}
