use std::collections::BTreeMap;

use super::{mixed_norm, BesovParams, NormReport};
use crate::error::{Error, Result};
use crate::exact::{Real, Surd};
use crate::grid::{CellAddress, CellTree};
use crate::scalar::PowScalar;
use crate::stepfun::StepFunction;
use crate::rat;

/// A Haar pair function is indexed by its parent cell and the index of the sibling pair.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HaarKey {
    pub parent: CellAddress,
    pub pair: u32,
}

impl HaarKey {
    pub fn binary(parent: CellAddress) -> Self {
        HaarKey { parent, pair: 0 }
    }
}

/// Coefficients `d_S = ∫ f φ_S` with
/// `φ_S = (1/|A| + 1/|B|)^(-1/2) (1_A/|A| - 1_B/|B|)` for the children `A, B` of `S`.
#[derive(Clone, Debug, PartialEq)]
pub struct HaarCoeffs<T> {
    pub coeffs: BTreeMap<HaarKey, T>,
}

impl<T> Default for HaarCoeffs<T> {
    fn default() -> Self {
        HaarCoeffs { coeffs: BTreeMap::new() }
    }
}

fn require_binary<G: CellTree + ?Sized>(tree: &G, node: &CellAddress) -> Result<()> {
    match tree.child_count(node)? {
        2 => Ok(()),
        n => Err(Error::NotBinary(n)),
    }
}

/// `d_S` from the integrals of `f` over the two children.
fn coefficient<T: PowScalar, G: CellTree + ?Sized>(node: &CellAddress, i0: &T, i1: &T, tree: &G) -> Result<T> {
    require_binary(tree, node)?;
    let ma = tree.measure(&node.child(0))?;
    let mb = tree.measure(&node.child(1))?;
    let h = ma.recip() + mb.recip();
    let diff = i0.scale(&ma.recip()) - i1.scale(&mb.recip());
    Ok(diff.mul_power(&h, &rat(-1, 2)))
}

/// Haar expansion of a step function on a binary grid.
///
/// Walks the compressed trie of the support: along a chain of single-child nodes the
/// subtree integral is constant, so a chain carrying zero integral is skipped without
/// materializing its cells.
pub fn haar_expand<T: PowScalar, G: CellTree + ?Sized>(f: &StepFunction<T>, tree: &G) -> Result<HaarCoeffs<T>> {
    require_binary(tree, &CellAddress::root())?;
    let entries: Vec<(&CellAddress, T)> = f
        .pieces()
        .iter()
        .map(|(k, v)| Ok((k, v.scale(&tree.measure(k)?))))
        .collect::<Result<_>>()?;
    let mut out = BTreeMap::new();
    if entries.is_empty() || entries[0].0.level() == 0 {
        return Ok(HaarCoeffs { coeffs: out });
    }
    // prefix sums of the piece integrals
    let mut pre = Vec::with_capacity(entries.len() + 1);
    pre.push(T::zero());
    for e in &entries {
        let next = pre[pre.len() - 1].clone() + e.1.clone();
        pre.push(next);
    }
    let sum = |lo: usize, hi: usize| pre[hi].clone() - pre[lo].clone();
    let mut stack: Vec<(CellAddress, usize, usize)> = vec![(CellAddress::root(), 0, entries.len())];
    while let Some((node, lo, hi)) = stack.pop() {
        let first = entries[lo].0;
        let lcp = if hi - lo == 1 { first.level() } else { first.common_prefix_len(entries[hi - 1].0) };
        let total = sum(lo, hi);
        if !total.is_zero() {
            for l in node.level()..lcp {
                let u = first.prefix(l);
                let d = first.digits()[l];
                let (i0, i1) = if d == 0 { (total.clone(), T::zero()) } else { (T::zero(), total.clone()) };
                let c = coefficient(&u, &i0, &i1, tree)?;
                if !c.is_zero() {
                    out.insert(HaarKey::binary(u), c);
                }
            }
        }
        if hi - lo == 1 {
            continue;
        }
        let b = first.prefix(lcp);
        let split = lo + entries[lo..hi].partition_point(|e| e.0.digits()[lcp] == 0);
        let c = coefficient(&b, &sum(lo, split), &sum(split, hi), tree)?;
        if !c.is_zero() {
            out.insert(HaarKey::binary(b.clone()), c);
        }
        if split < hi {
            stack.push((b.child(1), split, hi));
        }
        if lo < split {
            stack.push((b.child(0), lo, split));
        }
    }
    Ok(HaarCoeffs { coeffs: out })
}

/// `mean + Σ d_S φ_S` as a step function.
pub fn haar_synthesize<T: PowScalar, G: CellTree + ?Sized>(
    mean: &T,
    coeffs: &HaarCoeffs<T>,
    tree: &G,
) -> Result<StepFunction<T>> {
    let mut parts: Vec<(CellAddress, T)> = Vec::new();
    for (key, d) in &coeffs.coeffs {
        require_binary(tree, &key.parent)?;
        let (a, b) = (key.parent.child(0), key.parent.child(1));
        let (ma, mb) = (tree.measure(&a)?, tree.measure(&b)?);
        let c = d.mul_power(&(ma.recip() + mb.recip()), &rat(-1, 2));
        parts.push((a, c.scale(&ma.recip())));
        parts.push((b, -c.scale(&mb.recip())));
    }
    let disjoint = coeffs.coeffs.keys().collect::<Vec<_>>().windows(2).all(|w| !w[0].parent.is_prefix_of(&w[1].parent));
    let mut f = if disjoint {
        StepFunction::from_pieces(parts)?
    } else {
        let mut acc = StepFunction::zero();
        for (k, v) in parts {
            acc = acc.add(&StepFunction::from_pieces(vec![(k, v)])?, tree)?;
        }
        acc
    };
    if !mean.is_zero() {
        f = f.add(&StepFunction::from_pieces(vec![(CellAddress::root(), mean.clone())])?, tree)?;
    }
    Ok(f)
}

/// `Σ d_S^2 + (∫f)^2 - ∫f^2`, zero by orthonormality.
pub fn parseval_defect<T: PowScalar, G: CellTree + ?Sized>(
    f: &StepFunction<T>,
    coeffs: &HaarCoeffs<T>,
    tree: &G,
) -> Result<T> {
    let mean = f.integral(tree)?;
    let mut acc = mean.clone() * mean;
    for d in coeffs.coeffs.values() {
        acc = acc + d.clone() * d.clone();
    }
    for (k, v) in f.pieces() {
        acc = acc - (v.clone() * v.clone()).scale(&tree.measure(k)?);
    }
    Ok(acc)
}

/// `(Σ_j (Σ_{S at level j} (|d_S| |Q_S|^(1/p - s - 1/2))^p)^(q/p))^(1/q)`, `Q_S` the parent cell.
pub fn haar_norm<T: PowScalar, G: CellTree + ?Sized>(
    coeffs: &HaarCoeffs<T>,
    params: &BesovParams,
    tree: &G,
) -> Result<NormReport> {
    let w = (params.coef_exponent() - rat(1, 2)) * &params.p;
    let mut levels: BTreeMap<usize, Real> = BTreeMap::new();
    for (key, d) in &coeffs.coeffs {
        let weight = Real::Exact(Surd::power(&tree.measure(&key.parent)?, &w)?);
        let term = d.abs_pow(&params.p).mul(&weight);
        let e = levels.entry(key.parent.level()).or_insert_with(Real::zero);
        *e = e.add(&term);
    }
    let (value, per_level) = mixed_norm(&levels, params);
    Ok(NormReport { method: "haar".into(), params: params.clone(), value, per_level })
}
