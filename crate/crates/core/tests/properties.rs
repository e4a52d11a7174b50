use besov_core::grid::{canonicalize_to_interval_grid, AbstractTree, CellTree};
use besov_core::norms::{
    greedy_atomic_decomposition, haar_expand, haar_synthesize, parseval_defect, rep_norm, rep_to_function,
};
use besov_core::sample::{random_step_function, random_tree, rng};
use besov_core::stepfun::{conditional_expectation, martingale_difference};
use besov_core::{parse_rational, rat, BesovParams, CellAddress, Grid, Rational, StepFunction, Surd};
use num_traits::Zero;
use proptest::prelude::*;
use rand::Rng;

fn weighted(num: i64) -> Grid {
    Grid::weighted_binary(rat(num, 10), 8).unwrap()
}

fn sample(seed: u64) -> StepFunction<Rational> {
    random_step_function(&mut rng(seed), 2, 6, 0.6)
}

fn surd(f: &StepFunction<Rational>) -> StepFunction<Surd> {
    f.map(|v| Surd::from_rational(v.clone()))
}

fn leaves(t: &AbstractTree, addr: CellAddress, out: &mut Vec<CellAddress>) {
    if t.children.is_empty() {
        out.push(addr.clone());
    }
    for (i, c) in t.children.iter().enumerate() {
        leaves(c, addr.child(i as u8), out);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn children_partition_parent(num in 1i64..10, word in proptest::collection::vec(0u8..2, 0..12)) {
        let g = weighted(num);
        let cell = g.materialize(&CellAddress::new(word)).unwrap();
        let kids = g.children(&cell).unwrap();
        prop_assert_eq!(kids.len(), 2);
        prop_assert_eq!(&kids[0].a, &cell.a);
        prop_assert_eq!(&kids[0].b, &kids[1].a);
        prop_assert_eq!(&kids[1].b, &cell.b);
        prop_assert_eq!(kids[0].measure() / cell.measure(), rat(num, 10));
    }

    #[test]
    fn tower_property(seed in any::<u64>(), num in 1i64..10, j in 0usize..7, k in 0usize..7) {
        let (g, f) = (weighted(num), sample(seed));
        let lhs = conditional_expectation(&conditional_expectation(&f, k, &g).unwrap(), j, &g).unwrap();
        let rhs = conditional_expectation(&f, j.min(k), &g).unwrap();
        prop_assert!(lhs.equivalent(&rhs, &g).unwrap());
    }

    #[test]
    fn martingale_differences_telescope(seed in any::<u64>(), num in 1i64..10) {
        let (g, f) = (weighted(num), sample(seed));
        let mut acc = conditional_expectation(&f, 0, &g).unwrap();
        for k in 1..=f.max_level() {
            acc = acc.add(&martingale_difference(&f, k, &g).unwrap(), &g).unwrap();
        }
        prop_assert!(acc.equivalent(&f, &g).unwrap());
    }

    #[test]
    fn martingale_differences_have_mean_zero(seed in any::<u64>(), num in 1i64..10, k in 1usize..7) {
        let (g, f) = (weighted(num), sample(seed));
        let d = martingale_difference(&f, k, &g).unwrap();
        for c in g.level_cells(k - 1, 1 << 10).unwrap() {
            prop_assert!(d.integral_over(&c.address, &g).unwrap().is_zero());
        }
    }

    #[test]
    fn haar_parseval_and_round_trip(seed in any::<u64>(), num in 1i64..10) {
        let (g, f) = (weighted(num), surd(&sample(seed)));
        let coeffs = haar_expand(&f, &g).unwrap();
        prop_assert!(parseval_defect(&f, &coeffs, &g).unwrap().is_zero());
        let back = haar_synthesize(&f.integral(&g).unwrap(), &coeffs, &g).unwrap();
        prop_assert!(back.equivalent(&f, &g).unwrap());
    }

    #[test]
    fn atomic_round_trip(seed in any::<u64>(), num in 1i64..10) {
        let (g, f) = (weighted(num), surd(&sample(seed)));
        let params = BesovParams::finite(rat(1, 4), rat(2, 1), rat(1, 1)).unwrap();
        let rep = greedy_atomic_decomposition(&f, &params, &g).unwrap();
        prop_assert!(rep_to_function(&rep, &params, &g).unwrap().equivalent(&f, &g).unwrap());
    }

    #[test]
    fn rep_norm_is_a_tree_invariant(seed in any::<u64>()) {
        let mut r = rng(seed);
        let tree = random_tree(&mut r, 3, 3);
        let grid = canonicalize_to_interval_grid(&tree).unwrap();
        let mut ls = Vec::new();
        leaves(&tree, CellAddress::root(), &mut ls);
        for a in &ls {
            prop_assert_eq!(tree.measure(a).unwrap(), grid.measure(a).unwrap());
        }
        let f = StepFunction::from_pieces(ls.into_iter().map(|a| (a, Surd::from_int(r.gen_range(-4..=4))))).unwrap();
        let params = BesovParams::finite(rat(1, 2), rat(1, 1), rat(1, 1)).unwrap();
        let on_tree = rep_norm(&greedy_atomic_decomposition(&f, &params, &tree).unwrap(), &params).value;
        let on_grid = rep_norm(&greedy_atomic_decomposition(&f, &params, &grid).unwrap(), &params).value;
        prop_assert!(on_tree.is_exact());
        prop_assert_eq!(on_tree, on_grid);
    }

    #[test]
    fn rationals_parse_back(n in -10_000i64..10_000, d in 1i64..10_000) {
        let x = rat(n, d);
        prop_assert_eq!(parse_rational(&x.to_string()).unwrap(), x);
    }
}
