use num_bigint::BigInt;
use serde_json::{json, Value};
use std::collections::BTreeMap;

use super::select::{ExoticMode, ExoticSelection};
use crate::error::Result;
use crate::exact::Surd;
use crate::grid::{CellAddress, Grid};
use crate::norms::{haar_synthesize, BesovParams, HaarCoeffs, HaarKey};
use crate::stepfun::StepFunction;
use crate::{rat, Rational};

#[derive(Clone, Debug)]
pub struct ExoticTerm {
    pub n: usize,
    pub i: usize,
    pub parent: CellAddress,
    pub coefficient: Surd,
}

/// `Σ_n Σ_i 2^-n i^(-1/t) |P|^-(1/p - s - 1/2) φ_S` on the Haar grid of the selection,
/// `t = q` for `p > q` and `t = p` for `q > p`.
#[derive(Clone, Debug)]
pub struct ExoticFunction {
    pub mode: ExoticMode,
    pub params: BesovParams,
    pub grid: Grid,
    pub terms: Vec<ExoticTerm>,
    pub coeffs: HaarCoeffs<Surd>,
    pub function: StepFunction<Surd>,
}

impl ExoticFunction {
    pub fn terms_of(&self, n: usize) -> impl Iterator<Item = &ExoticTerm> {
        self.terms.iter().filter(move |t| t.n == n)
    }

    pub fn n_max(&self) -> usize {
        self.terms.iter().map(|t| t.n).max().unwrap_or(0)
    }

    /// The partial expansion over a single `n`.
    pub fn slice(&self, n: usize) -> Result<StepFunction<Surd>> {
        let coeffs = HaarCoeffs {
            coeffs: self.terms_of(n).map(|t| (HaarKey::binary(t.parent.clone()), t.coefficient.clone())).collect(),
        };
        haar_synthesize(&Surd::zero(), &coeffs, &self.grid)
    }

    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|t| {
                json!({
                    "n": t.n,
                    "i": t.i,
                    "parent": t.parent,
                    "level": t.parent.level(),
                    "coefficient": t.coefficient.to_string(),
                    "approx": t.coefficient.to_f64(),
                })
            })
            .collect();
        json!({
            "mode": self.mode.name(),
            "params": self.params.to_json(),
            "terms": terms,
            "support_cells": self.function.len(),
        })
    }
}

pub fn build_exotic_function(sel: &ExoticSelection) -> Result<ExoticFunction> {
    let params = &sel.params;
    let t = sel.mode.threshold_exponent(params);
    let pair_exp = -(params.coef_exponent() - rat(1, 2));
    let mut terms = Vec::new();
    let mut coeffs = BTreeMap::new();
    for c in sel.cells() {
        let parent = c.pair_parent();
        let scale = Rational::new(1.into(), num_traits::pow(BigInt::from(2), c.n));
        let coefficient = Surd::from_rational(scale)
            .mul_power(&Rational::from_integer(c.i.into()), &-t.recip())?
            .mul_power(&parent.measure(), &pair_exp)?;
        coeffs.insert(HaarKey::binary(parent.address.clone()), coefficient.clone());
        terms.push(ExoticTerm { n: c.n, i: c.i, parent: parent.address.clone(), coefficient });
    }
    let coeffs = HaarCoeffs { coeffs };
    let grid = sel.haar_grid().clone();
    let function = haar_synthesize(&Surd::zero(), &coeffs, &grid)?;
    Ok(ExoticFunction { mode: sel.mode, params: params.clone(), grid, terms, coeffs, function })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exotic::select_exotic_families;
    use crate::norms::haar_expand;

    #[test]
    fn one_group_has_four_pairs() {
        let w = Grid::weighted_binary(rat(1, 5), 40).unwrap().with_depth_limit(1024);
        let d = Grid::nadic(2, 40).unwrap().with_depth_limit(1024);
        let p = BesovParams::finite(rat(1, 5), rat(2, 1), rat(1, 1)).unwrap();
        let sel = select_exotic_families(&w, &d, &p, 4, 1).unwrap();
        let f = build_exotic_function(&sel).unwrap();
        assert_eq!(f.terms.len(), 4);
        assert_eq!(f.function.len(), 8);
        let back = haar_expand(&f.function, &f.grid).unwrap();
        assert_eq!(back, f.coeffs);
    }
}
