//! Besov-type norms: atomic representations, martingale differences, oscillations and
//! Haar pair coefficients.

mod atomic;
mod haar;
mod martingale;
mod params;
mod report;

pub use atomic::{greedy_atomic_decomposition, rep_norm, rep_to_function, souza_atom, AtomicRep};
pub use haar::{haar_expand, haar_norm, haar_synthesize, parseval_defect, HaarCoeffs, HaarKey};
pub use martingale::{martingale_norm, oscillation_norm};
pub use params::{BesovParams, QExponent};
pub use report::{LevelValue, NormReport};

use std::collections::BTreeMap;

use crate::exact::Real;
use crate::Rational;

/// `(Σ_k (inner_k)^(q/p))^(1/q)` from per-level sums `inner_k = Σ |t|^p`, with the per-level
/// values `inner_k^(1/p)`; for `q = ∞` the largest per-level value.
pub(crate) fn mixed_norm(levels: &BTreeMap<usize, Real>, params: &BesovParams) -> (Real, Vec<LevelValue>) {
    let inv_p = params.p.recip();
    let per_level: Vec<LevelValue> =
        levels.iter().map(|(k, s)| LevelValue { level: *k, value: root(s, &inv_p) }).collect();
    let value = match &params.q {
        QExponent::Infinite => per_level.iter().fold(Real::zero(), |m, l| m.max(&l.value)),
        QExponent::Finite(q) => {
            let qp = q / &params.p;
            let mut acc = Real::zero();
            for s in levels.values() {
                acc = acc.add(&root(s, &qp));
            }
            root(&acc, &q.recip())
        }
    };
    (value, per_level)
}

/// `(Σ_k t_k^q)^(1/q)`, or the max for `q = ∞`.
pub(crate) fn lq(terms: &[Real], q: &QExponent) -> Real {
    match q {
        QExponent::Infinite => terms.iter().fold(Real::zero(), |m, t| m.max(t)),
        QExponent::Finite(q) => {
            let mut acc = Real::zero();
            for t in terms {
                acc = acc.add(&root(t, q));
            }
            root(&acc, &q.recip())
        }
    }
}

/// `x^e` for a nonnegative `x`.
fn root(x: &Real, e: &Rational) -> Real {
    if x.as_rational().map_or(false, |r| num_traits::Zero::is_zero(&r)) {
        Real::zero()
    } else if num_traits::One::is_one(e) {
        x.clone()
    } else {
        x.abs_pow(e)
    }
}
