//! Seeded random test objects. The stream is ChaCha8 (`rand_chacha::ChaCha8Rng::seed_from_u64`),
//! so any ChaCha8 implementation reproduces the corpus.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::grid::{AbstractTree, CellAddress};
use crate::stepfun::StepFunction;
use crate::{rat, Rational};

pub const DEFAULT_SEED: u64 = 20_240_917;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn small_rational<R: Rng>(r: &mut R) -> Rational {
    rat(r.gen_range(-6..=6), r.gen_range(1..=4))
}

/// A random step function on cells of a `branching`-adic tree, pieces at levels up to `depth`.
///
/// Each node splits with probability `split` (always at the root), otherwise it becomes a
/// piece with a small rational value (possibly zero).
pub fn random_step_function<R: Rng>(r: &mut R, branching: u8, depth: usize, split: f64) -> StepFunction<Rational> {
    let mut pieces = Vec::new();
    let mut stack = vec![CellAddress::root()];
    while let Some(c) = stack.pop() {
        if c.level() < depth && (c.level() == 0 || r.gen_bool(split)) {
            for d in (0..branching).rev() {
                stack.push(c.child(d));
            }
        } else {
            pieces.push((c, small_rational(r)));
        }
    }
    StepFunction::from_pieces(pieces).expect("pieces are an antichain")
}

/// The standard corpus: `count` depth-8 dyadic step functions.
pub fn dyadic_corpus(seed: u64, count: usize) -> Vec<StepFunction<Rational>> {
    let mut r = rng(seed);
    (0..count).map(|_| random_step_function(&mut r, 2, 8, 0.7)).collect()
}

/// A random measured tree of the given depth; branching in `2..=max_branching`, child
/// measures proportional to random weights in `1..=9`.
pub fn random_tree<R: Rng>(r: &mut R, depth: usize, max_branching: usize) -> AbstractTree {
    fn build<R: Rng>(r: &mut R, measure: Rational, left: usize, maxb: usize) -> AbstractTree {
        if left == 0 {
            return AbstractTree::leaf(measure);
        }
        let n = r.gen_range(2..=maxb.max(2));
        let w: Vec<i64> = (0..n).map(|_| r.gen_range(1..=9)).collect();
        let total: i64 = w.iter().sum();
        let children = w.iter().map(|&wi| build(r, &measure * rat(wi, total), left - 1, maxb)).collect();
        AbstractTree { measure, children }
    }
    build(r, rat(1, 1), depth, max_branching)
}
