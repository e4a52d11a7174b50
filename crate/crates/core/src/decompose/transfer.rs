use rayon::prelude::*;
use serde_json::{json, Value};
use std::collections::BTreeMap;

use super::families::{fitted_decay_ratio, maximal_families, FamilyLadder, Target};
use super::k0::IntervalQuery;
use crate::error::Result;
use crate::exact::{Real, Surd};
use crate::grid::{CellAddress, Grid};
use crate::norms::{rep_norm, AtomicRep, BesovParams};
use crate::scalar::Scalar;

/// `a_Q = Σ_P (|P|/|Q|)^(1/p - s) a_P` over the maximal destination cells `P ⊂ Q`.
#[derive(Clone, Debug)]
pub struct AtomTransfer {
    pub q: CellAddress,
    pub ladder: FamilyLadder,
    pub rep: AtomicRep<Surd>,
    /// `Σ_{P in level k} |s_P|^p`.
    pub level_sums: BTreeMap<usize, Real>,
    pub fitted_ratio: Option<f64>,
    /// `rep_norm` of the transferred coefficients.
    pub norm: Real,
}

impl AtomTransfer {
    pub fn to_json(&self) -> Value {
        let coeffs: Vec<Value> =
            self.rep.coeffs.iter().map(|(k, v)| json!({"address": k, "coefficient": v.to_string()})).collect();
        let sums: Vec<Value> = self
            .level_sums
            .iter()
            .map(|(k, v)| json!({"level": k, "sum": v.to_string(), "approx": v.to_f64()}))
            .collect();
        json!({
            "q": self.q,
            "ladder": self.ladder.to_json(),
            "coefficients": coeffs,
            "level_sums": sums,
            "fitted_ratio": self.fitted_ratio,
            "norm": self.norm.decimal(),
            "norm_exact": self.norm.symbolic(),
        })
    }
}

/// Re-expands the source atom on `q` in the destination grid, down to destination level `depth`.
pub fn atom_transfer(src: &Grid, dst: &Grid, q: &CellAddress, params: &BesovParams, depth: usize) -> Result<AtomTransfer> {
    let cell = src.materialize(q)?;
    let qm = cell.measure();
    let ladder = maximal_families(dst, &Target::Interval(IntervalQuery::of_cell(&cell)), depth)?;
    let e = params.coef_exponent();
    let mut coeffs = BTreeMap::new();
    for c in ladder.cells() {
        coeffs.insert(c.address.clone(), Surd::power(&(c.measure() / &qm), &e)?);
    }
    let rep = AtomicRep::new(coeffs);
    let mut level_sums: BTreeMap<usize, Real> = BTreeMap::new();
    for (k, v) in &rep.coeffs {
        let s = level_sums.entry(k.level()).or_insert_with(Real::zero);
        *s = s.add(&v.abs_pow(&params.p));
    }
    let f: BTreeMap<usize, f64> = level_sums.iter().map(|(k, v)| (*k, v.to_f64())).collect();
    let fitted_ratio = fitted_decay_ratio(&f, ladder.k0, depth);
    let norm = rep_norm(&rep, params).value;
    Ok(AtomTransfer { q: q.clone(), ladder, rep, level_sums, fitted_ratio, norm })
}

/// Largest transfer norm over all source cells up to `src_levels`, each expanded
/// `extra_levels` below its own level. Returns the bound and a maximizing cell.
pub fn transfer_norm_bound(
    src: &Grid,
    dst: &Grid,
    params: &BesovParams,
    src_levels: usize,
    extra_levels: usize,
) -> Result<(f64, CellAddress)> {
    let mut cells = Vec::new();
    for k in 0..=src_levels {
        cells.extend(src.level_cells(k, crate::grid::MAX_VALIDATION_CELLS)?.into_iter().map(|c| c.address));
    }
    let norms: Vec<(f64, CellAddress)> = cells
        .par_iter()
        .map(|q| Ok((atom_transfer(src, dst, q, params, q.level() + extra_levels)?.norm.to_f64(), q.clone())))
        .collect::<Result<_>>()?;
    Ok(norms.into_iter().fold((0.0, CellAddress::root()), |m, x| if x.0 > m.0 { x } else { m }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::{rep_to_function, souza_atom};
    use crate::rat;
    use crate::grid::CellTree;
    use num_traits::Zero;

    #[test]
    fn identity_transfer() {
        let g = Grid::weighted_binary(rat(1, 3), 8).unwrap();
        let p = BesovParams::finite(rat(1, 4), rat(2, 1), rat(1, 1)).unwrap();
        let q = CellAddress::from_slice(&[1, 0, 1]);
        let t = atom_transfer(&g, &g, &q, &p, 8).unwrap();
        assert_eq!(t.rep.coeffs.len(), 1);
        assert_eq!(t.rep.coeffs[&q], Surd::from_int(1));
        assert!(t.ladder.residual.is_zero());
    }

    #[test]
    fn dyadic_half_into_triadic() {
        let d = Grid::nadic(2, 4).unwrap();
        let t = Grid::nadic(3, 20).unwrap();
        let p = BesovParams::finite(rat(1, 4), rat(2, 1), rat(2, 1)).unwrap();
        let q = CellAddress::from_slice(&[0]);
        let tr = atom_transfer(&d, &t, &q, &p, 10).unwrap();
        // 1/2 = 0.111..._3: one maximal cell per level, [0,1/3], then [1/3,4/9], ...
        assert!(tr.ladder.families.values().all(|f| f.len() == 1));
        let first = CellAddress::from_slice(&[0]);
        assert_eq!(tr.rep.coeffs[&first], Surd::power(&rat(2, 3), &rat(1, 4)).unwrap());
        // matches a_Q on the covered cells
        let f = rep_to_function(&tr.rep, &p, &t).unwrap();
        let atom = souza_atom(&q, &p, &d).unwrap();
        let v = atom.pieces().values().next().unwrap().clone();
        for c in tr.ladder.cells() {
            assert_eq!(f.value_on(&c.address), Some(&v));
        }
        assert!(tr.ladder.residual < rat(1, 3).pow(10));
    }

    #[test]
    fn round_trip_covers_source_cell() {
        let w = Grid::weighted_binary(rat(1, 5), 40).unwrap();
        let d = Grid::nadic(2, 40).unwrap();
        let p = BesovParams::finite(rat(1, 4), rat(2, 1), rat(2, 1)).unwrap();
        let q = CellAddress::from_slice(&[0, 1]);
        let there = atom_transfer(&w, &d, &q, &p, 14).unwrap();
        let mut back = AtomicRep::<Surd>::default();
        let mut lost = there.ladder.residual.clone();
        for (c, s) in &there.rep.coeffs {
            let t = atom_transfer(&d, &w, c, &p, 24).unwrap();
            lost += &t.ladder.residual;
            back.merge(&AtomicRep::new(t.rep.coeffs.iter().map(|(k, v)| (k.clone(), v.clone() * s.clone())).collect()));
        }
        // composed coefficients are (|R|/|Q|)^(1/p-s)
        let qm = w.measure(&q).unwrap();
        for (r, s) in &back.coeffs {
            assert_eq!(s, &Surd::power(&(w.measure(r).unwrap() / &qm), &p.coef_exponent()).unwrap());
        }
        let covered: crate::Rational = back.coeffs.keys().map(|r| w.measure(r).unwrap()).sum();
        assert_eq!(covered + lost.clone(), qm);
        assert!(lost < rat(1, 100) * qm);
    }
}
