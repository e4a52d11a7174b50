//! The ten acceptance criteria, each with its tolerance and time budget.
//!
//! Run with `cargo test -p besov-core --test acceptance -- --nocapture` to see the report.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use besov_core::decompose::{cantor_complement_decomposition, indicator_decomposition, IntervalQuery, Target};
use besov_core::exotic::{
    bilipschitz_diagnostic, build_exotic_function, exotic_norm_report, select_exotic_families, verify_selection,
};
use besov_core::grid::{
    canonicalize_to_interval_grid, regroup_by_measure, validate_good_grid, validate_recalibration, AbstractTree,
};
use besov_core::norms::{
    greedy_atomic_decomposition, haar_expand, martingale_norm, oscillation_norm, parseval_defect, rep_norm,
    rep_to_function,
};
use besov_core::sample::{dyadic_corpus, random_tree, rng, DEFAULT_SEED};
use besov_core::stepfun::{conditional_expectation, martingale_difference, OscMode};
use besov_core::{rat, BesovParams, CellAddress, Grid, Rational, StepFunction, Surd};

type Outcome = Result<String, String>;

fn check(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn c1_grid_validity() -> Outcome {
    let d = validate_good_grid(&Grid::nadic(2, 12).map_err(err)?, 12).map_err(err)?;
    check(d.lambda_hat == rat(1, 2) && d.lambda == rat(1, 2), "dyadic constants")?;
    let w = validate_good_grid(&Grid::weighted_binary(rat(1, 5), 12).map_err(err)?, 12).map_err(err)?;
    check(w.lambda_hat == rat(1, 5) && w.lambda == rat(4, 5), "weighted constants")?;
    Ok("(1/2,1/2) and (1/5,4/5)".into())
}

fn surd(f: &StepFunction<Rational>) -> StepFunction<Surd> {
    f.map(|v| Surd::from_rational(v.clone()))
}

fn c2_exact_algebra() -> Outcome {
    let g = Grid::nadic(2, 8).map_err(err)?;
    for (idx, f) in dyadic_corpus(DEFAULT_SEED, 100).iter().enumerate() {
        let top = f.max_level();
        // tower
        for k in 0..=top {
            let fk = conditional_expectation(f, k, &g).map_err(err)?;
            for j in 0..k {
                let a = conditional_expectation(&fk, j, &g).map_err(err)?;
                let b = conditional_expectation(f, j, &g).map_err(err)?;
                check(a.equivalent(&b, &g).map_err(err)?, format!("tower fails on #{idx} at ({j},{k})"))?;
            }
        }
        // telescoping and mean zero
        let mut acc = conditional_expectation(f, 0, &g).map_err(err)?;
        for k in 1..=top {
            let d = martingale_difference(f, k, &g).map_err(err)?;
            let back = conditional_expectation(&d, k - 1, &g).map_err(err)?;
            check(back.pieces().values().all(|v| v == &rat(0, 1)), format!("mean-zero fails on #{idx}, k={k}"))?;
            acc = acc.add(&d, &g).map_err(err)?;
        }
        check(acc.equivalent(f, &g).map_err(err)?, format!("telescoping fails on #{idx}"))?;
        let fs = surd(f);
        let h = haar_expand(&fs, &g).map_err(err)?;
        check(parseval_defect(&fs, &h, &g).map_err(err)?.is_zero(), format!("Parseval fails on #{idx}"))?;
    }
    Ok("100 functions, zero defect".into())
}

fn c3_round_trip() -> Outcome {
    let g = Grid::nadic(2, 8).map_err(err)?;
    let params = BesovParams::finite(rat(1, 4), rat(2, 1), rat(2, 1)).map_err(err)?;
    for (idx, f) in dyadic_corpus(DEFAULT_SEED, 100).iter().enumerate() {
        let fs = surd(f);
        let rep = greedy_atomic_decomposition(&fs, &params, &g).map_err(err)?;
        let back = rep_to_function(&rep, &params, &g).map_err(err)?;
        check(back.equivalent(&fs, &g).map_err(err)?, format!("round trip fails on #{idx}"))?;
    }
    Ok("100 functions reconstructed exactly".into())
}

fn leaves(t: &AbstractTree, addr: CellAddress, out: &mut Vec<CellAddress>) {
    if t.children.is_empty() {
        out.push(addr);
    } else {
        for (i, c) in t.children.iter().enumerate() {
            leaves(c, addr.child(i as u8), out);
        }
    }
}

fn c4_isometry() -> Outcome {
    use rand::Rng;
    let mut r = rng(DEFAULT_SEED);
    let params = BesovParams::finite(rat(1, 2), rat(1, 1), rat(1, 1)).map_err(err)?;
    for idx in 0..20 {
        let tree = random_tree(&mut r, 4, 3);
        let grid = canonicalize_to_interval_grid(&tree).map_err(err)?;
        let mut ls = Vec::new();
        leaves(&tree, CellAddress::root(), &mut ls);
        let f: StepFunction<Surd> = StepFunction::from_pieces(
            ls.into_iter().map(|a| (a, Surd::from_rational(rat(r.gen_range(-5..=5), r.gen_range(1..=3))))),
        )
        .map_err(err)?;
        let on_tree = rep_norm(&greedy_atomic_decomposition(&f, &params, &tree).map_err(err)?, &params).value;
        let on_grid = rep_norm(&greedy_atomic_decomposition(&f, &params, &grid).map_err(err)?, &params).value;
        check(on_tree == on_grid && on_tree.is_exact(), format!("tree #{idx}: {on_tree:?} vs {on_grid:?}"))?;
    }
    Ok("20 trees, exact equality".into())
}

fn c5_regrouping() -> Outcome {
    let g = regroup_by_measure(&Grid::weighted_binary(rat(1, 5), 12).map_err(err)?, 12, rat(1, 2)).map_err(err)?;
    let chk = validate_recalibration(&g, 12).map_err(err)?;
    check(chk.partitions_ok, "level partitions")?;
    let worst = chk.level_stats.iter().map(|s| &s.max_measure / &s.min_measure).max().unwrap();
    check(worst <= rat(5, 1), format!("spread {worst}"))?;
    Ok(format!("max l_k/m_k = {worst}"))
}

fn c6_cantor() -> Outcome {
    let g = Grid::nadic(3, 13).map_err(err)?;
    let r = cantor_complement_decomposition(&g, &CellAddress::root(), 12).map_err(err)?;
    check(r.level_sums.len() == 12, "levels 1..12")?;
    check(r.level_sums.values().all(|s| s == &rat(1, 2)), "root sums")?;
    let q = cantor_complement_decomposition(&g, &CellAddress::from_slice(&[0]), 12).map_err(err)?;
    check(q.q_power == rat(1, 2) && q.level_sums.values().all(|s| s == &rat(1, 4)), "self-similarity on [0,1/3]")?;
    Ok("all sums 1/2; [0,1/3] gives 1/4 = |Q|^a/2".into())
}

fn c7_indicator_decay() -> Outcome {
    let g = Grid::nadic(2, 40).map_err(err)?;
    let params = BesovParams::finite(rat(1, 4), rat(2, 1), rat(2, 1)).map_err(err)?;
    let target = Target::Interval(IntervalQuery::new(rat(1, 3), rat(3, 4)).map_err(err)?);
    let d = indicator_decomposition(&g, &target, &params, 18).map_err(err)?;
    check(d.ladder.k0 + 16 <= 18, "k0")?;
    let ratio = d.fitted_ratio.ok_or("no fit")?;
    check(ratio <= 0.75, format!("ratio {ratio}"))?;
    Ok(format!("k0 = {}, fitted ratio {ratio:.4}", d.ladder.k0))
}

fn c8_exotic() -> Outcome {
    let w = Grid::weighted_binary(rat(1, 5), 40).map_err(err)?.with_depth_limit(16384);
    let d = Grid::nadic(2, 40).map_err(err)?.with_depth_limit(16384);
    let params = BesovParams::finite(rat(1, 5), rat(2, 1), rat(1, 1)).map_err(err)?;
    let sel = select_exotic_families(&w, &d, &params, 4, 3).map_err(err)?;
    let v = verify_selection(&sel);
    check(v.ok(), format!("selection: {:?}", v.failures))?;
    let f = build_exotic_function(&sel).map_err(err)?;
    let rep = exotic_norm_report(&f, &sel, None).map_err(err)?;
    check(rep.round_trip, "Haar round trip")?;
    check(rep.closed_form_exact(), "(a) generic norm differs from the closed form")?;
    check(rep.increments_exceed_one(), "(b) increments")?;
    check(rep.bound.truncated_ok(), format!("(c) bound {}", rep.bound.truncated.to_f64()))?;
    // (d) against a direct harmonic search
    let mut h = rat(0, 1);
    let mut brute = Vec::new();
    let mut i = 0i64;
    for target in [2i64, 4] {
        while h <= rat(target, 1) {
            i += 1;
            h += rat(1, i);
        }
        brute.push(i as usize);
    }
    check(rep.r[..2] == brute[..], format!("(d) r = {:?}", rep.r))?;
    let total = rep.partial_sums.last().unwrap().to_f64();
    check(total > 3.0, "partial sums")?;
    Ok(format!(
        "r = {:?}, q-th power = {total:.6} (exact), source bound {:.6}",
        rep.r,
        rep.bound.truncated.to_f64()
    ))
}

fn c9_dichotomy() -> Outcome {
    let d = Grid::nadic(2, 40).map_err(err)?;
    let w = Grid::weighted_binary(rat(1, 5), 40).map_err(err)?;
    let same = bilipschitz_diagnostic(&d, &d, 20).map_err(err)?;
    check(same.rows.iter().all(|r| r.min == r.max), "dyadic spread")?;
    let diff = bilipschitz_diagnostic(&w, &d, 20).map_err(err)?;
    check((diff.slope - 2.0).abs() <= 0.2, format!("slope {}", diff.slope))?;
    Ok(format!("slope {:.4}", diff.slope))
}

/// Observed on the default corpus; regression pins, not paper constants.
const MART_OSC: (f64, f64) = (0.5, 2.5);
const MART_REP: (f64, f64) = (0.2, 1.5);

fn c10_cross_validation() -> Outcome {
    let g = Grid::nadic(2, 8).map_err(err)?;
    let params = BesovParams::finite(rat(1, 4), rat(2, 1), rat(2, 1)).map_err(err)?;
    let mut lo = BTreeMap::new();
    let mut hi = BTreeMap::new();
    for f in dyadic_corpus(DEFAULT_SEED, 100) {
        let fs = surd(&f);
        let m0 = martingale_norm(&fs, &params, &g, false).map_err(err)?.value.to_f64();
        let m1 = martingale_norm(&fs, &params, &g, true).map_err(err)?.value.to_f64();
        let o = oscillation_norm(&fs, &params, &g, OscMode::default()).map_err(err)?.value.to_f64();
        let rp = rep_norm(&greedy_atomic_decomposition(&fs, &params, &g).map_err(err)?, &params).value.to_f64();
        for (name, x) in [("mart/osc", m0 / o), ("mart/rep", m1 / rp)] {
            check(x.is_finite() && x > 0.0, format!("{name} = {x}"))?;
            let l = lo.entry(name).or_insert(f64::INFINITY);
            *l = f64::min(*l, x);
            let h = hi.entry(name).or_insert(0.0f64);
            *h = h.max(x);
        }
    }
    let within = |name: &str, (a, b): (f64, f64)| lo[name] >= a && hi[name] <= b;
    check(within("mart/osc", MART_OSC) && within("mart/rep", MART_REP), format!("{lo:?} {hi:?}"))?;
    Ok(format!(
        "mart/osc in [{:.4}, {:.4}], mart/rep in [{:.4}, {:.4}]",
        lo["mart/osc"], hi["mart/osc"], lo["mart/rep"], hi["mart/rep"]
    ))
}

#[test]
fn acceptance_suite() {
    let criteria: [(&str, u64, fn() -> Outcome); 10] = [
        ("grid validity", 5, c1_grid_validity),
        ("exact algebra", 10, c2_exact_algebra),
        ("round trip", 10, c3_round_trip),
        ("isometry", 5, c4_isometry),
        ("regrouping", 5, c5_regrouping),
        ("cantor", 5, c6_cantor),
        ("indicator decay", 5, c7_indicator_decay),
        ("exotic oracle", 60, c8_exotic),
        ("dichotomy", 10, c9_dichotomy),
        ("norm cross-validation", 30, c10_cross_validation),
    ];
    let mut failed = Vec::new();
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let out = run();
        let took = t.elapsed();
        let in_time = took <= Duration::from_secs(*budget);
        let (status, detail) = match (&out, in_time) {
            (Ok(d), true) => ("PASS", d.clone()),
            (Ok(d), false) => ("FAIL", format!("over budget: {d}")),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        println!("criterion {:>2} {status} {name} [{:.2}s / {budget}s] {detail}", i + 1, took.as_secs_f64());
        if status == "FAIL" {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
