use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde_json::{json, Value};
use std::collections::BTreeSet;

use super::profile::{extremal_words, graded_word, jstar, jstar_level, jstar_profile};
use crate::decompose::{k0_within, IntervalQuery};
use crate::error::{Error, Result};
use crate::exact::log2_estimate;
use crate::grid::{CellAddress, CellTree, Grid, GridCell};
use crate::norms::BesovParams;
use crate::Rational;

/// Upper bound on `r_n`; the selection materializes `O(Σ r_n)` cells.
pub const MAX_SELECTION_CELLS: usize = 100_000;

/// `p > q`: a function in the `∘` space but not the `⋆` space, built from `⋆` Haar pairs.
/// `q > p`: a function in the `⋆` space but not the `∘` space, built from `∘` Haar pairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExoticMode {
    Claim5,
    Claim6,
}

impl ExoticMode {
    pub fn for_params(params: &BesovParams) -> Result<Self> {
        let q = params
            .q_finite()
            .ok_or_else(|| Error::InvalidParameter("exotic construction needs finite q".into()))?;
        if &params.p > q {
            Ok(ExoticMode::Claim5)
        } else if &params.p < q {
            Ok(ExoticMode::Claim6)
        } else {
            Err(Error::InvalidParameter(format!("exotic construction needs p != q, got p = q = {q}")))
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ExoticMode::Claim5 => "p>q",
            ExoticMode::Claim6 => "q>p",
        }
    }

    /// Exponent `t` in `H(r_n) > 2^(n t)`: `q` for `p > q`, `p` for `q > p`.
    pub fn threshold_exponent(&self, params: &BesovParams) -> Rational {
        match self {
            ExoticMode::Claim5 => params.q_finite().unwrap().clone(),
            ExoticMode::Claim6 => params.p.clone(),
        }
    }
}

/// `H(r) = Σ_{i<=r} 1/i` by binary splitting.
pub fn harmonic(r: usize) -> Rational {
    fn split(lo: usize, hi: usize) -> (BigInt, BigInt) {
        if hi - lo == 1 {
            return (BigInt::one(), BigInt::from(lo));
        }
        let mid = (lo + hi) / 2;
        let (a, b) = split(lo, mid);
        let (c, d) = split(mid, hi);
        (&a * &d + &c * &b, b * d)
    }
    if r == 0 {
        return Rational::zero();
    }
    let (n, d) = split(1, r + 1);
    Rational::new(n, d)
}

/// `2^(n t)` when `n t` is an integer, else `None`.
fn threshold(n: usize, t: &Rational) -> Option<Rational> {
    let e = t * Rational::from_integer(BigInt::from(n));
    if !e.is_integer() {
        return None;
    }
    let e = e.to_integer();
    let e: usize = e.try_into().ok()?;
    Some(Rational::from_integer(num_traits::pow(BigInt::from(2), e)))
}

/// Least `r` with `H(r) > 2^(n t)`, decided exactly.
pub fn harmonic_threshold(n: usize, t: &Rational) -> Result<usize> {
    let tf = num_traits::ToPrimitive::to_f64(t).unwrap_or(f64::INFINITY);
    let target_f = 2f64.powf(n as f64 * tf);
    // H(r) ≈ ln r + γ
    let est = (target_f - 0.577_215_664_9).exp();
    if !est.is_finite() || est > MAX_SELECTION_CELLS as f64 {
        return Err(Error::SelectionInfeasible { required: est.min(usize::MAX as f64) as usize, limit: MAX_SELECTION_CELLS });
    }
    let exceeds = |r: usize| -> bool {
        let h = harmonic(r);
        match threshold(n, t) {
            Some(th) => h > th,
            None => crate::exact::Real::from_rational(h)
                .partial_cmp_value(&crate::exact::Real::Exact(
                    crate::exact::Surd::power(&crate::rat(2, 1), &(t * Rational::from_integer(n.into()))).unwrap(),
                ))
                .map_or(false, |o| o == std::cmp::Ordering::Greater),
        }
    };
    let mut r = (est.round() as usize).max(1);
    while !exceeds(r) {
        r += 1;
    }
    while r > 1 && exceeds(r - 1) {
        r -= 1;
    }
    Ok(r)
}

/// One selected cell `Q^n_i` with its witness `P^n_i` in `⋆` and, for `q > p`, the `∘` cell
/// `Q̂^n_i ⊂ P^n_i` at the first `∘` level that fits.
#[derive(Clone, Debug)]
pub struct SelectedCell {
    pub n: usize,
    pub i: usize,
    pub m: usize,
    pub q: GridCell,
    pub jstar: usize,
    pub witness: GridCell,
    pub qhat: Option<GridCell>,
}

impl SelectedCell {
    /// The cell whose two children form the Haar pair.
    pub fn pair_parent(&self) -> &GridCell {
        self.qhat.as_ref().unwrap_or(&self.witness)
    }
}

#[derive(Clone, Debug)]
pub struct SelectionGroup {
    pub n: usize,
    pub v: usize,
    pub r: usize,
    pub cells: Vec<SelectedCell>,
}

#[derive(Clone, Debug)]
pub struct ExoticSelection {
    pub mode: ExoticMode,
    pub params: BesovParams,
    pub sep: usize,
    pub circ: Grid,
    pub star: Grid,
    pub groups: Vec<SelectionGroup>,
}

impl ExoticSelection {
    pub fn cells(&self) -> impl Iterator<Item = &SelectedCell> {
        self.groups.iter().flat_map(|g| g.cells.iter())
    }

    /// The grid carrying the Haar pairs: `⋆` for `p > q`, `∘` for `q > p`.
    pub fn haar_grid(&self) -> &Grid {
        match self.mode {
            ExoticMode::Claim5 => &self.star,
            ExoticMode::Claim6 => &self.circ,
        }
    }

    pub fn to_json(&self) -> Value {
        let groups: Vec<Value> = self
            .groups
            .iter()
            .map(|g| {
                json!({
                    "n": g.n,
                    "v": g.v,
                    "r": g.r,
                    "jstar": g.cells.iter().map(|c| c.jstar).collect::<Vec<_>>(),
                    "left_digits": g.cells.iter().map(|c| c.m).collect::<Vec<_>>(),
                    "pair_levels": g.cells.iter().map(|c| c.pair_parent().level()).collect::<Vec<_>>(),
                })
            })
            .collect();
        json!({
            "mode": self.mode.name(),
            "params": self.params.to_json(),
            "sep": self.sep,
            "groups": groups,
        })
    }
}

fn spread_at(circ: &Grid, star: &Grid, k: usize) -> Result<usize> {
    Ok(jstar_profile(circ, star, k, Some(&extremal_words(k)))?.spread())
}

fn depth_error(e: Error, needed: usize, limit: usize) -> Error {
    match e {
        Error::DepthLimit { .. } => Error::SelectionInfeasible { required: needed, limit },
        e => e,
    }
}

/// `j*_0(0^m 1^(v-m)) ≈ zeros m + ones (v - m)`, fitted on the two extremal words.
struct LevelModel {
    zeros: f64,
    ones: f64,
}

impl LevelModel {
    const PROBE: usize = 64;

    fn fit(circ: &Grid, star: &Grid) -> Result<Self> {
        let k = Self::PROBE;
        let z = jstar_level(circ, star, &graded_word(k, k))? as f64 / k as f64;
        let o = jstar_level(circ, star, &graded_word(0, k))? as f64 / k as f64;
        Ok(LevelModel { zeros: z, ones: o })
    }

    fn count(&self, v: usize, r: usize, sep: usize, floor: Option<usize>, used: &BTreeSet<usize>) -> usize {
        let mut js: Vec<f64> = (0..v)
            .filter(|m| !used.contains(m))
            .map(|m| self.zeros * m as f64 + self.ones * (v - m) as f64)
            .collect();
        js.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut last: Option<f64> = None;
        let mut c = 0;
        for j in js {
            if floor.map_or(false, |f| j <= f as f64) {
                continue;
            }
            if last.map_or(true, |l| j >= l + sep as f64) {
                last = Some(j);
                c += 1;
                if c == r {
                    break;
                }
            }
        }
        c
    }
}

/// Smallest level from `start` at which the model admits `r` picks, with a small margin.
#[allow(clippy::too_many_arguments)]
fn predicted_level(
    model: &LevelModel,
    start: usize,
    r: usize,
    sep: usize,
    prev_max: usize,
    has_prev: bool,
    used: &BTreeSet<usize>,
    limit: usize,
) -> usize {
    let floor = has_prev.then_some(prev_max + sep);
    let mut v = start;
    while v <= limit && model.count(v, r, sep, floor, used) < r {
        v += (v / 64).max(1);
    }
    if v == start {
        v
    } else {
        v + v / 100 + sep
    }
}

/// Cells `0^m 1^(v-m)` of `∘` whose `j*_0` values are pairwise `sep` apart, `r_n` per `n`,
/// each `m` used once overall so that all witnesses are disjoint.
pub fn select_exotic_families(
    circ: &Grid,
    star: &Grid,
    params: &BesovParams,
    sep: usize,
    n_max: usize,
) -> Result<ExoticSelection> {
    let mode = ExoticMode::for_params(params)?;
    if sep == 0 {
        return Err(Error::InvalidParameter("sep must be positive".into()));
    }
    for g in [circ, star] {
        match g.uniform_branching() {
            Some(2) => {}
            n => return Err(Error::NotBinary(n.unwrap_or(0))),
        }
    }
    if spread_at(circ, star, 32)? <= spread_at(circ, star, 16)? {
        return Err(Error::SelectionInfeasible { required: usize::MAX, limit: circ.depth_limit() });
    }
    let model = LevelModel::fit(circ, star)?;
    let t = mode.threshold_exponent(params);
    let mut groups: Vec<SelectionGroup> = Vec::new();
    let mut used: BTreeSet<usize> = BTreeSet::new();
    let mut prev_max = 0usize;
    let mut prev_v = 0usize;
    for n in 1..=n_max {
        let r = harmonic_threshold(n, &t)?;
        let mut v = (prev_v + 1).max(r);
        if mode == ExoticMode::Claim6 && n > 1 {
            v = v.max(prev_v + sep + 3);
        }
        v = predicted_level(&model, v, r, sep, prev_max, !groups.is_empty(), &used, circ.depth_limit());
        let chosen = loop {
            if v > circ.depth_limit() {
                return Err(Error::SelectionInfeasible { required: v, limit: circ.depth_limit() });
            }
            let cand: Vec<usize> = (0..v).filter(|m| !used.contains(m)).collect();
            let mut scored = cand
                .par_iter()
                .map(|&m| {
                    let j = jstar_level(circ, star, &graded_word(m, v)).map_err(|e| {
                        let need = (-log2_estimate(&CellTree::measure(circ, &graded_word(m, v)).unwrap_or_else(|_| crate::rat(1, 2)))) as usize + 2;
                        depth_error(e, need, star.depth_limit())
                    })?;
                    Ok((j, m))
                })
                .collect::<Result<Vec<_>>>()?;
            scored.sort_unstable();
            let mut pick = Vec::new();
            let mut last: Option<usize> = None;
            for (j, m) in scored {
                if j <= prev_max + sep && !groups.is_empty() {
                    continue;
                }
                if last.map_or(true, |l| j >= l + sep) {
                    pick.push((j, m));
                    last = Some(j);
                    if pick.len() == r {
                        break;
                    }
                }
            }
            if pick.len() == r {
                break pick;
            }
            let deficit = r - pick.len();
            v += (deficit * sep).max(v / 2).max(1);
        };
        let mut cells = Vec::with_capacity(r);
        for (idx, (j, m)) in chosen.into_iter().enumerate() {
            used.insert(m);
            let (j2, w) = jstar(circ, star, &graded_word(m, v))?;
            debug_assert_eq!(j, j2);
            let q = circ.materialize(&graded_word(m, v))?;
            let qhat = match mode {
                ExoticMode::Claim5 => None,
                ExoticMode::Claim6 => {
                    let k = k0_within(circ, &q, &IntervalQuery::new(w.a.clone(), w.b.clone())?)
                        .map_err(|e| depth_error(e, v + 2 * sep, circ.depth_limit()))?;
                    Some(k.inside.into_iter().next().unwrap())
                }
            };
            cells.push(SelectedCell { n, i: idx + 1, m, q, jstar: j, witness: w, qhat });
        }
        prev_max = cells.iter().map(|c| c.jstar).max().unwrap_or(prev_max);
        prev_v = v;
        groups.push(SelectionGroup { n, v, r, cells });
    }
    Ok(ExoticSelection { mode, params: params.clone(), sep, circ: circ.clone(), star: star.clone(), groups })
}

/// Independent re-check of every selection invariant with fresh exact `k0` computations.
#[derive(Clone, Debug, Default)]
pub struct SelectionCheck {
    pub failures: Vec<String>,
    pub checked_cells: usize,
}

impl SelectionCheck {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn to_json(&self) -> Value {
        json!({"ok": self.ok(), "checked_cells": self.checked_cells, "failures": self.failures})
    }
}

fn inside(inner: &GridCell, outer: &GridCell) -> bool {
    outer.a <= inner.a && inner.b <= outer.b
}

pub fn verify_selection(sel: &ExoticSelection) -> SelectionCheck {
    let mut fails = Vec::new();
    let t = sel.mode.threshold_exponent(&sel.params);
    let per_cell: Vec<Vec<String>> = sel
        .cells()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|c| {
            let mut f = Vec::new();
            let tag = format!("n={} i={}", c.n, c.i);
            match jstar(&sel.circ, &sel.star, &c.q.address) {
                Ok((j, _)) if j == c.jstar => {}
                Ok((j, _)) => f.push(format!("{tag}: j* recomputed as {j}, stored {}", c.jstar)),
                Err(e) => f.push(format!("{tag}: {e}")),
            }
            if c.witness.level() != c.jstar || !inside(&c.witness, &c.q) {
                f.push(format!("{tag}: witness not a level-j* cell inside Q"));
            }
            match sel.star.materialize(&c.witness.address) {
                Ok(w) if w.a == c.witness.a && w.b == c.witness.b => {}
                _ => f.push(format!("{tag}: witness is not a cell of the target grid")),
            }
            if let Some(h) = &c.qhat {
                if !inside(h, &c.witness) {
                    f.push(format!("{tag}: paired cell not inside the witness"));
                }
                if let Ok(k) = IntervalQuery::new(c.witness.a.clone(), c.witness.b.clone()).and_then(|iq| k0_within(&sel.circ, &c.q, &iq)) {
                    if k.level != h.level() {
                        f.push(format!("{tag}: paired cell level {} is not the first fitting level {}", h.level(), k.level));
                    }
                }
            }
            f
        })
        .collect();
    fails.extend(per_cell.into_iter().flatten());
    let mut prev_max: Option<usize> = None;
    let mut prev_v = 0;
    for g in &sel.groups {
        match harmonic_threshold(g.n, &t) {
            Ok(r) if r == g.r => {}
            _ => fails.push(format!("n={}: r={} is not the least harmonic threshold", g.n, g.r)),
        }
        if g.cells.len() != g.r || g.v < g.r || g.v <= prev_v {
            fails.push(format!("n={}: size or level ordering violated", g.n));
        }
        if sel.mode == ExoticMode::Claim6 && g.n > 1 && g.v <= prev_v + sel.sep + 2 {
            fails.push(format!("n={}: level gap below sep + 2", g.n));
        }
        let mut js: Vec<usize> = g.cells.iter().map(|c| c.jstar).collect();
        js.sort_unstable();
        if js.windows(2).any(|w| w[1] - w[0] < sel.sep) {
            fails.push(format!("n={}: j* values closer than sep", g.n));
        }
        if let (Some(pm), Some(lo)) = (prev_max, js.first()) {
            if *lo <= pm + sel.sep {
                fails.push(format!("n={}: j* values not above the previous group by sep", g.n));
            }
        }
        if g.cells.iter().any(|c| c.q.level() != g.v) {
            fails.push(format!("n={}: cell off level v", g.n));
        }
        prev_max = js.last().copied().or(prev_max);
        prev_v = g.v;
    }
    let mut addrs: Vec<&CellAddress> = sel.cells().map(|c| &c.witness.address).collect();
    addrs.sort();
    if addrs.windows(2).any(|w| w[0].is_prefix_of(w[1])) {
        fails.push("witness cells overlap".into());
    }
    SelectionCheck { failures: fails, checked_cells: addrs.len() }
}
