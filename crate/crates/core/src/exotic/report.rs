use rayon::prelude::*;
use serde_json::{json, Value};
use std::cmp::Ordering;
use std::collections::BTreeMap;

use super::build::ExoticFunction;
use super::select::{harmonic, ExoticMode, ExoticSelection};
use crate::decompose::{k0_of_interval, maximal_families, IntervalQuery, Target};
use crate::error::Result;
use crate::exact::{pow_positive, Enclosure, Real, Surd, WORK_PREC};
use crate::grid::{rat_str, CellTree, Grid};
use crate::norms::{haar_expand, haar_norm, rep_norm, AtomicRep, BesovParams, NormReport};
use crate::stepfun::lp_norm_pow;
use crate::scalar::Scalar;
use crate::{rat, Rational};

fn exactly_equal(a: &Real, b: &Real) -> bool {
    a.is_exact() && b.is_exact() && a.partial_cmp_value(b) == Some(Ordering::Equal)
}

fn real_json(r: &Real) -> Value {
    json!({"value": r.decimal(), "exact": r.symbolic()})
}

fn two_pow(e: &Rational) -> Result<Surd> {
    Surd::power(&rat(2, 1), e)
}

/// `(Σ_{n<=N} 2^(-nq))^(1/q) (Σ_{i<=r} i^(-ρ) + r^(1-ρ)/(ρ-1))^(1/u)`, with `ρ = p/q, u = p`
/// for `p > q` and `ρ = q/p, u = q` for `q > p`. The last term bounds the tail of the series.
#[derive(Clone, Debug)]
pub struct BoundReport {
    pub n_max: usize,
    pub r_max: usize,
    pub truncated: Enclosure,
    /// Same with the sum over `n` taken to infinity.
    pub infinite: Enclosure,
    pub threshold: Rational,
}

impl BoundReport {
    pub fn truncated_ok(&self) -> bool {
        self.truncated.hi <= self.threshold
    }

    pub fn infinite_ok(&self) -> bool {
        self.infinite.hi <= self.threshold
    }

    pub fn to_json(&self) -> Value {
        json!({
            "n_max": self.n_max,
            "r_max": self.r_max,
            "truncated": {"lo": self.truncated.decimal(20), "hi_f64": self.truncated.to_f64(), "ok": self.truncated_ok()},
            "infinite": {"lo": self.infinite.decimal(20), "hi_f64": self.infinite.to_f64(), "ok": self.infinite_ok()},
            "threshold": rat_str(&self.threshold),
        })
    }
}

pub fn coefficient_bound(mode: ExoticMode, params: &BesovParams, n_max: usize, r_max: usize) -> BoundReport {
    let p = &params.p;
    let q = params.q_finite().expect("finite q").clone();
    let (rho, u) = match mode {
        ExoticMode::Claim5 => (p / &q, p.clone()),
        ExoticMode::Claim6 => (&q / p, q.clone()),
    };
    let mut a = Enclosure::exact(rat(0, 1));
    for n in 1..=n_max {
        a = a.add(&pow_positive(&rat(2, 1), &(-&q * Rational::from_integer(n.into())), WORK_PREC));
    }
    // Σ_{n>=1} 2^(-nq) = 1/(2^q - 1)
    let two_q = pow_positive(&rat(2, 1), &q, WORK_PREC);
    let one = Enclosure::exact(rat(1, 1));
    let den = two_q.sub(&one);
    let a_inf = Enclosure::new(den.hi.recip(), den.lo.recip());
    let mut s = Enclosure::exact(rat(0, 1));
    for i in 1..=r_max {
        s = s.add(&pow_positive(&Rational::from_integer(i.into()), &-rho.clone(), WORK_PREC));
    }
    let tail = pow_positive(&Rational::from_integer(r_max.into()), &(rat(1, 1) - &rho), WORK_PREC)
        .mul(&Enclosure::exact((&rho - rat(1, 1)).recip()));
    let inner = s.add(&tail).pow(&u.recip());
    BoundReport {
        n_max,
        r_max,
        truncated: a.pow(&q.recip()).mul(&inner),
        infinite: a_inf.pow(&q.recip()).mul(&inner),
        threshold: rat(12825, 10000),
    }
}

/// `∫|f_n|^p` for the part of `f` with index `n`, computed from the step function and from
/// the pair data; `paper_form` is `2^(-np) Σ_i |P|^(sp) i^(-p/t)`, equal when the children halve `P`.
#[derive(Clone, Debug)]
pub struct LpCheck {
    pub n: usize,
    pub generic: Real,
    pub from_pairs: Real,
    pub paper_form: Real,
}

impl LpCheck {
    pub fn pairs_match(&self) -> bool {
        exactly_equal(&self.generic, &self.from_pairs)
    }

    pub fn paper_match(&self) -> bool {
        exactly_equal(&self.generic, &self.paper_form)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n,
            "generic": real_json(&self.generic),
            "from_pairs": real_json(&self.from_pairs),
            "paper_form": real_json(&self.paper_form),
            "pairs_match": self.pairs_match(),
            "paper_match": self.paper_match(),
        })
    }
}

/// The low-`n` part of `f` re-expanded in Souza atoms of the other grid.
#[derive(Clone, Debug)]
pub struct TransferSummary {
    pub n_max: usize,
    pub extra_levels: usize,
    pub atoms: usize,
    pub norm: Real,
    /// Largest uncovered share of a pair cell at the chosen depth.
    pub max_residual_share: f64,
    pub bound_ratio: f64,
}

impl TransferSummary {
    pub fn to_json(&self) -> Value {
        json!({
            "n_max": self.n_max,
            "extra_levels": self.extra_levels,
            "atoms": self.atoms,
            "norm": self.norm.decimal(),
            "max_residual_share": self.max_residual_share,
            "ratio_to_bound": self.bound_ratio,
        })
    }
}

#[derive(Clone, Debug)]
pub struct ExoticReport {
    pub mode: ExoticMode,
    pub params: BesovParams,
    pub r: Vec<usize>,
    pub v: Vec<usize>,
    /// `haar_expand` of the materialized function returned the stored coefficients.
    pub round_trip: bool,
    pub generic: NormReport,
    pub closed_form: Real,
    /// `q`-th power of the norm accumulated over `n`.
    pub partial_sums: Vec<Real>,
    pub increments: Vec<Real>,
    pub bound: BoundReport,
    pub lp: Vec<LpCheck>,
    pub transfer: Option<TransferSummary>,
}

impl ExoticReport {
    pub fn closed_form_exact(&self) -> bool {
        exactly_equal(&self.generic.value, &self.closed_form)
    }

    pub fn increments_exceed_one(&self) -> bool {
        let one = Real::from_rational(rat(1, 1));
        self.increments.iter().all(|x| x.partial_cmp_value(&one) == Some(Ordering::Greater))
    }

    pub fn to_json(&self) -> Value {
        let n = self.partial_sums.len();
        let last = self.partial_sums.last().map(|x| x.to_f64()).unwrap_or(0.0);
        json!({
            "mode": self.mode.name(),
            "params": self.params.to_json(),
            "r": self.r,
            "v": self.v,
            "round_trip": self.round_trip,
            "target_norm": {
                "generic": self.generic.to_json(),
                "closed_form": real_json(&self.closed_form),
                "exact_match": self.closed_form_exact(),
                "partial_sums_q_power": self.partial_sums.iter().map(real_json).collect::<Vec<_>>(),
                "increments": self.increments.iter().map(real_json).collect::<Vec<_>>(),
                "increments_exceed_one": self.increments_exceed_one(),
                "statement": format!(
                    "partial sums reach {last:.6} after {n} terms; each term {} 1",
                    if self.increments_exceed_one() { "exceeds" } else { "does not always exceed" }
                ),
            },
            "source_bound": self.bound.to_json(),
            "lp": self.lp.iter().map(LpCheck::to_json).collect::<Vec<_>>(),
            "transfer": self.transfer.as_ref().map(TransferSummary::to_json),
        })
    }
}

fn closed_form_levels(f: &ExoticFunction) -> Result<(BTreeMap<usize, Real>, BTreeMap<usize, BTreeMap<usize, Real>>)> {
    let p = &f.params.p;
    let t = match f.mode {
        ExoticMode::Claim5 => f.params.q_finite().unwrap().clone(),
        ExoticMode::Claim6 => p.clone(),
    };
    // level -> Σ 2^(-np) i^(-p/t), and the same split by n
    let mut levels: BTreeMap<usize, Real> = BTreeMap::new();
    let mut by_n: BTreeMap<usize, BTreeMap<usize, Real>> = BTreeMap::new();
    for term in &f.terms {
        let np = p * Rational::from_integer(term.n.into());
        let x = two_pow(&-np)?.mul_power(&Rational::from_integer(term.i.into()), &-(p / &t))?;
        let x = Real::Exact(x);
        let l = levels.entry(term.parent.level()).or_insert_with(Real::zero);
        *l = l.add(&x);
        let l = by_n.entry(term.n).or_default().entry(term.parent.level()).or_insert_with(Real::zero);
        *l = l.add(&x);
    }
    Ok((levels, by_n))
}

fn lq_power(levels: &BTreeMap<usize, Real>, params: &BesovParams) -> Real {
    let qp = params.q_finite().unwrap() / &params.p;
    levels.values().fold(Real::zero(), |acc, s| acc.add(&s.abs_pow(&qp)))
}

/// `∫|φ_S|^p = (1/|A| + 1/|B|)^(-p/2) (|A|^(1-p) + |B|^(1-p))`.
fn pair_lp(grid: &Grid, parent: &crate::grid::CellAddress, p: &Rational) -> Result<Real> {
    let a = grid.measure(&parent.child(0))?;
    let b = grid.measure(&parent.child(1))?;
    let c = Surd::power(&(a.recip() + b.recip()), &(-p / rat(2, 1)))?;
    let e = rat(1, 1) - p;
    Ok(Real::Exact(c * (Surd::power(&a, &e)? + Surd::power(&b, &e)?)))
}

fn lp_checks(f: &ExoticFunction) -> Result<Vec<LpCheck>> {
    let p = &f.params.p;
    let t = match f.mode {
        ExoticMode::Claim5 => f.params.q_finite().unwrap().clone(),
        ExoticMode::Claim6 => p.clone(),
    };
    (1..=f.n_max())
        .into_par_iter()
        .map(|n| {
            let generic = lp_norm_pow(&f.slice(n)?, p, &f.grid)?;
            let mut from_pairs = Real::zero();
            let mut paper = Real::zero();
            for term in f.terms_of(n) {
                from_pairs = from_pairs.add(&term.coefficient.abs_pow(p).mul(&pair_lp(&f.grid, &term.parent, p)?));
                let np = p * Rational::from_integer(n.into());
                let x = two_pow(&-np)?
                    .mul_power(&f.grid.measure(&term.parent)?, &(&f.params.s * p))?
                    .mul_power(&Rational::from_integer(term.i.into()), &-(p / &t))?;
                paper = paper.add(&Real::Exact(x));
            }
            Ok(LpCheck { n, generic, from_pairs, paper_form: paper })
        })
        .collect()
}

fn transfer_summary(f: &ExoticFunction, sel: &ExoticSelection, n_max: usize, extra: usize, bound: f64) -> Result<TransferSummary> {
    let other = match f.mode {
        ExoticMode::Claim5 => &sel.circ,
        ExoticMode::Claim6 => &sel.star,
    };
    let e = f.params.coef_exponent();
    let pieces: Vec<_> = f
        .function
        .pieces()
        .iter()
        .filter(|(k, _)| f.terms.iter().any(|t| t.n <= n_max && t.parent.is_prefix_of(k)))
        .collect();
    let parts = pieces
        .par_iter()
        .map(|(addr, val)| {
            let cell = f.grid.materialize(addr)?;
            let q = IntervalQuery::of_cell(&cell);
            let depth = k0_of_interval(other, &q)?.level + extra;
            let ladder = maximal_families(other, &Target::Interval(q), depth)?;
            let mut rep = BTreeMap::new();
            for c in ladder.cells() {
                rep.insert(c.address.clone(), val.mul_power(&c.measure(), &e)?);
            }
            let share = crate::exact::Real::from_rational(&ladder.residual / cell.measure()).to_f64();
            Ok((AtomicRep::new(rep), share))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rep = AtomicRep::<Surd>::default();
    let mut worst: f64 = 0.0;
    for (r, s) in parts {
        rep.merge(&r);
        worst = worst.max(s);
    }
    let norm = rep_norm(&rep, &f.params).value;
    Ok(TransferSummary {
        n_max,
        extra_levels: extra,
        atoms: rep.len(),
        bound_ratio: norm.to_f64() / bound,
        norm,
        max_residual_share: worst,
    })
}

/// Norm report for an exotic function. `transfer` re-expands the terms with `n` up to the
/// given value in the other grid, `extra` levels below each pair cell.
pub fn exotic_norm_report(
    f: &ExoticFunction,
    sel: &ExoticSelection,
    transfer: Option<(usize, usize)>,
) -> Result<ExoticReport> {
    let params = &f.params;
    let q = params.q_finite().unwrap().clone();
    let coeffs = haar_expand(&f.function, &f.grid)?;
    let round_trip = coeffs == f.coeffs;
    let generic = haar_norm(&coeffs, params, &f.grid)?;
    let (levels, by_n) = closed_form_levels(f)?;
    let closed_form = lq_power(&levels, params).abs_pow(&q.recip());
    let r: Vec<usize> = sel.groups.iter().map(|g| g.r).collect();
    let v: Vec<usize> = sel.groups.iter().map(|g| g.v).collect();
    let increments: Vec<Real> = match f.mode {
        // 2^(-nq) H(r_n)
        ExoticMode::Claim5 => sel
            .groups
            .iter()
            .map(|g| {
                let w = two_pow(&-(&q * Rational::from_integer(g.n.into())))?;
                Ok(Real::Exact(w * Surd::from_rational(harmonic(g.r))))
            })
            .collect::<Result<_>>()?,
        ExoticMode::Claim6 => by_n.values().map(|l| lq_power(l, params)).collect(),
    };
    let mut partial_sums = Vec::new();
    let mut acc = Real::zero();
    for x in &increments {
        acc = acc.add(x);
        partial_sums.push(acc.clone());
    }
    let bound = coefficient_bound(f.mode, params, sel.groups.len(), r.iter().copied().max().unwrap_or(1));
    let lp = lp_checks(f)?;
    let transfer = match transfer {
        Some((n, extra)) => Some(transfer_summary(f, sel, n.min(sel.groups.len()), extra, bound.truncated.to_f64())?),
        None => None,
    };
    Ok(ExoticReport {
        mode: f.mode,
        params: params.clone(),
        r,
        v,
        round_trip,
        generic,
        closed_form,
        partial_sums,
        increments,
        bound,
        lp,
        transfer,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exotic::{build_exotic_function, select_exotic_families};

    #[test]
    fn two_groups_claim5() {
        let w = Grid::weighted_binary(rat(1, 5), 40).unwrap().with_depth_limit(4096);
        let d = Grid::nadic(2, 40).unwrap().with_depth_limit(4096);
        let p = BesovParams::finite(rat(1, 5), rat(2, 1), rat(1, 1)).unwrap();
        let sel = select_exotic_families(&w, &d, &p, 4, 2).unwrap();
        let f = build_exotic_function(&sel).unwrap();
        let rep = exotic_norm_report(&f, &sel, Some((1, 6))).unwrap();
        assert!(rep.round_trip);
        assert!(rep.closed_form_exact());
        // H(4)/2 + H(31)/4
        let want = harmonic(4) / rat(2, 1) + harmonic(31) / rat(4, 1);
        assert_eq!(rep.closed_form.as_rational(), Some(want));
        assert!(rep.increments_exceed_one());
        assert!(rep.bound.truncated_ok());
        assert!(rep.lp.iter().all(|c| c.pairs_match() && c.paper_match()));
        let t = rep.transfer.unwrap();
        assert!(t.atoms > 0 && t.norm.to_f64() > 0.0);
    }

    #[test]
    fn two_groups_claim6() {
        let w = Grid::weighted_binary(rat(1, 5), 40).unwrap().with_depth_limit(4096);
        let d = Grid::nadic(2, 40).unwrap().with_depth_limit(4096);
        let p = BesovParams::finite(rat(1, 5), rat(1, 1), rat(2, 1)).unwrap();
        let sel = select_exotic_families(&w, &d, &p, 4, 2).unwrap();
        let f = build_exotic_function(&sel).unwrap();
        let rep = exotic_norm_report(&f, &sel, None).unwrap();
        assert!(rep.round_trip);
        assert!(rep.closed_form_exact(), "{:?} vs {:?}", rep.generic.value, rep.closed_form);
        assert!(rep.lp.iter().all(|c| c.pairs_match()));
    }

    #[test]
    fn bound_components() {
        let p = BesovParams::finite(rat(1, 5), rat(2, 1), rat(1, 1)).unwrap();
        let b = coefficient_bound(ExoticMode::Claim5, &p, 3, 1674);
        // (7/8) sqrt(π²/6 + ...) and sqrt(π²/6 + ...)
        assert!((b.truncated.to_f64() - 0.875 * 1.282_549_8).abs() < 1e-6);
        assert!(b.truncated_ok());
        assert!(!b.infinite_ok());
    }
}
