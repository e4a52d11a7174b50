use rayon::prelude::*;
use serde_json::{json, Value};

use crate::decompose::{k0_nadic_scaled, k0_of_interval, nadic_cell_at, IntervalQuery};
use crate::error::{Error, Result};
use crate::grid::{CellAddress, Generator, Grid, GridCell};

/// Enumeration guard for exhaustive profiles.
pub const PROFILE_GUARD: u64 = 1 << 20;

fn require_binary(g: &Grid) -> Result<()> {
    match g.uniform_branching() {
        Some(2) => Ok(()),
        Some(n) => Err(Error::NotBinary(n)),
        None => Err(Error::NotBinary(0)),
    }
}

/// `j*_0(Q)`: the first level of `star` with a cell whose closure lies in the `circ` cell
/// `Q`, and the leftmost such cell.
pub fn jstar(circ: &Grid, star: &Grid, q: &CellAddress) -> Result<(usize, GridCell)> {
    if let Some((n, k, j)) = jstar_scaled(circ, star, q)? {
        return Ok((k, nadic_cell_at(star, n, k, &j)));
    }
    let cell = circ.materialize(q)?;
    let k = k0_of_interval(star, &IntervalQuery::of_cell(&cell))?;
    let w = k.inside.into_iter().next().unwrap();
    Ok((k.level, w))
}

/// `j*_0(Q)` alone.
pub fn jstar_level(circ: &Grid, star: &Grid, q: &CellAddress) -> Result<usize> {
    match jstar_scaled(circ, star, q)? {
        Some((_, k, _)) => Ok(k),
        None => Ok(jstar(circ, star, q)?.0),
    }
}

/// Integer-only path for an n-adic `star` and a `circ` with closed-form endpoints.
fn jstar_scaled(circ: &Grid, star: &Grid, q: &CellAddress) -> Result<Option<(u32, usize, num_bigint::BigInt)>> {
    let n = match star.generator() {
        Generator::NAdic { n } => *n,
        _ => return Ok(None),
    };
    match circ.scaled_endpoints(q)? {
        Some((x, y, den)) => {
            let (k, j) = k0_nadic_scaled(n, &x, &y, &den, star.depth_limit())?;
            Ok(Some((n, k, j)))
        }
        None => Ok(None),
    }
}

/// The words `0^m 1^(k-m)` and `1^m 0^(k-m)`, `0 <= m <= k`.
pub fn extremal_words(k: usize) -> Vec<CellAddress> {
    let mut v: Vec<CellAddress> = (0..=k)
        .flat_map(|m| {
            let mut a = vec![0u8; m];
            a.resize(k, 1);
            let mut b = vec![1u8; m];
            b.resize(k, 0);
            [CellAddress::new(a), CellAddress::new(b)]
        })
        .collect();
    v.sort();
    v.dedup();
    v
}

/// `0^m 1^(v-m)`.
pub fn graded_word(m: usize, v: usize) -> CellAddress {
    let mut a = vec![0u8; m];
    a.resize(v, 1);
    CellAddress::new(a)
}

/// The values `j*_0(Q)` over level-`k` cells of `circ`.
#[derive(Clone, Debug)]
pub struct JStarProfile {
    pub level: usize,
    pub values: Vec<(CellAddress, usize)>,
    pub exhaustive: bool,
}

impl JStarProfile {
    pub fn min(&self) -> usize {
        self.values.iter().map(|v| v.1).min().unwrap_or(0)
    }

    pub fn max(&self) -> usize {
        self.values.iter().map(|v| v.1).max().unwrap_or(0)
    }

    pub fn spread(&self) -> usize {
        self.max() - self.min()
    }

    /// Number of distinct values.
    pub fn distinct(&self) -> usize {
        let mut v: Vec<usize> = self.values.iter().map(|v| v.1).collect();
        v.sort_unstable();
        v.dedup();
        v.len()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "level": self.level,
            "exhaustive": self.exhaustive,
            "min": self.min(),
            "max": self.max(),
            "spread": self.spread(),
            "distinct": self.distinct(),
            "values": self.values.iter().map(|(a, j)| json!({"address": a, "jstar": j})).collect::<Vec<_>>(),
        })
    }
}

/// `j*_0` on the given cells of level `k`, or on every level-`k` cell when none are given.
pub fn jstar_profile(circ: &Grid, star: &Grid, k: usize, cells: Option<&[CellAddress]>) -> Result<JStarProfile> {
    require_binary(circ)?;
    require_binary(star)?;
    let (list, exhaustive) = match cells {
        Some(c) => (c.to_vec(), false),
        None => {
            let n = 1u64.checked_shl(k as u32).unwrap_or(u64::MAX);
            if n > PROFILE_GUARD || k >= 64 {
                return Err(Error::Guard(n));
            }
            (circ.level_cells(k, PROFILE_GUARD)?.into_iter().map(|c| c.address).collect(), true)
        }
    };
    if let Some(bad) = list.iter().find(|a| a.level() != k) {
        return Err(Error::InvalidParameter(format!("cell {bad} is not at level {k}")));
    }
    let values = list
        .par_iter()
        .map(|a| Ok((a.clone(), jstar_level(circ, star, a)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(JStarProfile { level: k, values, exhaustive })
}

#[derive(Clone, Debug)]
pub struct SpreadRow {
    pub k: usize,
    pub min: usize,
    pub max: usize,
}

/// Spread of `j*_0` on extremal words by level, with a least-squares slope.
#[derive(Clone, Debug)]
pub struct BilipschitzReport {
    pub rows: Vec<SpreadRow>,
    pub slope: f64,
    pub intercept: f64,
    /// `min_k (m_k - k)` and `max_k (M_k - k)`.
    pub offset_low: i64,
    pub offset_high: i64,
    pub growing: bool,
}

impl BilipschitzReport {
    pub fn verdict(&self) -> &'static str {
        if self.growing {
            "growing-spread (exotic regime)"
        } else {
            "bounded-spread (consistent with bi-Lipschitz)"
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "rows": self.rows.iter().map(|r| json!({"k": r.k, "min": r.min, "max": r.max, "spread": r.max - r.min})).collect::<Vec<_>>(),
            "slope": self.slope,
            "intercept": self.intercept,
            "offset_low": self.offset_low,
            "offset_high": self.offset_high,
            "verdict": self.verdict(),
        })
    }
}

/// Least-squares line through `(x, y)`.
pub fn linear_fit(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

pub fn bilipschitz_diagnostic(circ: &Grid, star: &Grid, k_max: usize) -> Result<BilipschitzReport> {
    let mut rows = Vec::new();
    for k in 1..=k_max {
        let words = extremal_words(k);
        let p = jstar_profile(circ, star, k, Some(&words))?;
        rows.push(SpreadRow { k, min: p.min(), max: p.max() });
    }
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.k as f64, (r.max - r.min) as f64)).collect();
    let (slope, intercept) = linear_fit(&pts);
    let offset_low = rows.iter().map(|r| r.min as i64 - r.k as i64).min().unwrap_or(0);
    let offset_high = rows.iter().map(|r| r.max as i64 - r.k as i64).max().unwrap_or(0);
    let half = rows.len() / 2;
    let first_max = rows[..half].iter().map(|r| r.max - r.min).max().unwrap_or(0);
    let last = rows.last().map(|r| r.max - r.min).unwrap_or(0);
    let growing = slope > 0.25 && last > first_max;
    Ok(BilipschitzReport { rows, slope, intercept, offset_low, offset_high, growing })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat;

    #[test]
    fn identical_grids_have_no_spread() {
        let d = Grid::nadic(2, 12).unwrap();
        let p = jstar_profile(&d, &d, 6, None).unwrap();
        assert!(p.exhaustive);
        assert_eq!((p.min(), p.max()), (6, 6));
        let r = bilipschitz_diagnostic(&d, &d, 12).unwrap();
        assert!(r.rows.iter().all(|r| r.min == r.max && r.min == r.k));
        assert!(!r.growing);
    }

    #[test]
    fn extremal_cells_of_weighted_grid() {
        let w = Grid::weighted_binary(rat(1, 5), 12).unwrap();
        let d = Grid::nadic(2, 12).unwrap();
        let (left, _) = jstar(&w, &d, &graded_word(10, 10)).unwrap();
        let (right, _) = jstar(&w, &d, &graded_word(0, 10)).unwrap();
        // |Q| = 5^-10 and (4/5)^10: j* within a few levels of log2(1/|Q|)
        assert!((23..=27).contains(&left), "{left}");
        assert!((3..=7).contains(&right), "{right}");
        let s: Vec<usize> = [5, 10, 15, 20, 30]
            .iter()
            .map(|&k| jstar_profile(&w, &d, k, Some(&extremal_words(k))).unwrap().spread())
            .collect();
        assert!(s[0] < s[1] && s[1] < s[3] && s[2] < s[4]);
    }
}
