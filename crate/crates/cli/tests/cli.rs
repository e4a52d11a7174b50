use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn besov(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_besov")).args(args).output().expect("binary runs")
}

fn json_of(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn dyadic_grid_checks() {
    let o = besov(&["grid", "build", "--nadic", "2", "--depth", "10", "--check"]);
    assert_eq!(code(&o), 0);
    let v = json_of(&o);
    assert_eq!(v["check"]["meta"]["lambda"], "1/2");
    assert_eq!(v["check"]["meta"]["lambda_hat"], "1/2");
}

#[test]
fn regrouped_weighted_grid_has_bounded_spread() {
    let o = besov(&["grid", "build", "--weighted", "1/5", "--depth", "10", "--regroup", "--check"]);
    assert_eq!(code(&o), 0);
    let v = json_of(&o);
    for s in v["check"]["recalibration"]["level_stats"].as_array().unwrap() {
        let hi = besov_core::parse_rational(s["max_measure"].as_str().unwrap()).unwrap();
        let lo = besov_core::parse_rational(s["min_measure"].as_str().unwrap()).unwrap();
        assert!(hi / lo <= besov_core::rat(5, 1));
    }
}

#[test]
fn bad_weight_is_a_parameter_error() {
    assert_eq!(code(&besov(&["grid", "build", "--weighted", "0", "--depth", "4"])), 2);
}

#[test]
fn grid_export_then_check() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("g.json");
    let o = besov(&["grid", "export", "--weighted", "1/3", "--depth", "5", "--out", p.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let o = besov(&["grid", "check", p.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json_of(&o)["meta"]["lambda"], "2/3");
}

#[test]
fn constant_one_has_norm_one() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("one.json");
    std::fs::write(&p, r#"{"grid": "dyadic", "depth": 4, "pieces": [{"address": [], "value": "1"}]}"#).unwrap();
    let o = besov(&["norm", p.to_str().unwrap(), "--params", "s=1/4,p=2,q=2"]);
    assert_eq!(code(&o), 0);
    let v = json_of(&o);
    let norms = v["norms"].as_array().unwrap();
    assert_eq!(norms.len(), 4);
    assert!(norms.iter().all(|n| n["exact"] == "1"), "{v}");
}

#[test]
fn s_at_least_one_over_p_is_rejected() {
    let o = besov(&["norm", data("sample.json").to_str().unwrap(), "--params", "s=0.6,p=2"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn sample_norms_match_golden_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("norms.json");
    let csv = dir.path().join("norms.csv");
    let o = besov(&[
        "norm",
        data("sample.json").to_str().unwrap(),
        "--params",
        "s=1/4,p=2,q=2",
        "--out",
        out.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let got = std::fs::read(&out).unwrap();
    let want = std::fs::read(data("sample_norms.golden.json")).unwrap();
    assert!(got == want, "report differs from the golden file");
    let rows = std::fs::read_to_string(&csv).unwrap();
    assert!(rows.starts_with("method,level,value\n"));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let a = besov(&["decompose", "indicator", "--interval", "1/3,3/4", "--depth", "12"]);
    let b = besov(&["decompose", "indicator", "--interval", "1/3,3/4", "--depth", "12"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn cantor_sums_are_one_half() {
    let o = besov(&["decompose", "cantor", "--depth", "12"]);
    assert_eq!(code(&o), 0);
    let v = json_of(&o);
    assert_eq!(v["all_sums_equal"], true);
    assert_eq!(v["max_ratio"], "1/2");
}

#[test]
fn indicator_residual_is_a_dyadic_tail() {
    let o = besov(&["decompose", "indicator", "--interval", "1/3,3/4", "--depth", "24"]);
    assert_eq!(code(&o), 0);
    let v = json_of(&o);
    let r = besov_core::parse_rational(v["ladder"]["residual"].as_str().unwrap()).unwrap();
    assert!(r <= besov_core::rat(1, 1 << 23));
}

#[test]
fn transfer_reports_its_residual() {
    let o = besov(&["decompose", "transfer", "--from", "weighted:1/5", "--to", "nadic:2", "--cell", "0,1", "--depth", "20"]);
    assert_eq!(code(&o), 0);
    let v = json_of(&o);
    let r = besov_core::parse_rational(v["relative_residual"].as_str().unwrap()).unwrap();
    assert!(r < besov_core::rat(1, 100));
}

#[test]
fn identical_grids_have_zero_spread() {
    let o = besov(&["exotic", "profile", "--k", "10", "--circ", "dyadic", "--star", "dyadic"]);
    assert_eq!(code(&o), 0);
    let v = json_of(&o);
    assert_eq!(v["profile"]["spread"], 0);
    assert_eq!(v["profile"]["exhaustive"], true);
}

#[test]
fn equal_exponents_are_rejected() {
    assert_eq!(code(&besov(&["exotic", "select", "--p", "1", "--q", "1"])), 2);
}

#[test]
fn shallow_depth_limit_is_a_resource_guard() {
    assert_eq!(code(&besov(&["exotic", "select", "--nmax", "3", "--depth-limit", "64"])), 3);
}

#[test]
fn exotic_report_separates_the_grids() {
    let o = besov(&["exotic", "report", "--p", "2", "--q", "1", "--s", "1/5", "--nmax", "3"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json_of(&o);
    for k in ["round_trip", "closed_form_exact", "increments_exceed_one", "bound_truncated_ok"] {
        assert_eq!(v["checks"][k], true, "{k}");
    }
    let sums = v["target_norm"]["partial_sums_q_power"].as_array().unwrap();
    let last = besov_core::parse_rational(sums.last().unwrap()["exact"].as_str().unwrap()).unwrap();
    assert!(last > besov_core::rat(3, 1));
    assert!(v["source_bound"]["truncated"]["hi_f64"].as_f64().unwrap() < 1.2825);
}

#[test]
fn preset_writes_its_reports() {
    let dir = tempfile::tempdir().unwrap();
    let o = besov(&["preset", "run", "cantor", "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(dir.path().join("cantor.json").exists());
    assert!(dir.path().join("cantor.csv").exists());
}
