use std::path::PathBuf;

use besov_core::norms::{
    greedy_atomic_decomposition, haar_expand, haar_norm, martingale_norm, oscillation_norm, rep_norm, QExponent,
};
use besov_core::stepfun::{atomic_rep_from_json, stepfun_from_json, OscMode};
use besov_core::{BesovParams, Grid, NormReport, Real, StepFunction, Surd};
use clap::{Args, ValueEnum};
use serde_json::{json, Value};

use crate::out::{emit, read_json, write_csv};
use crate::Fail;

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Rep,
    Martingale,
    Osc,
    Haar,
    /// Every method on the same input.
    All,
}

#[derive(Args)]
pub struct NormArgs {
    /// A step function (`pieces`) or an atomic representation (`coeffs`) as JSON.
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "all")]
    pub method: Method,
    /// `s=..,p=..,q=..`; `q` defaults to `p` and may be `inf`.
    #[arg(long)]
    pub params: String,
    /// Leave out the level-0 term (mean of the function).
    #[arg(long)]
    pub no_level0: bool,
    /// Subtract the cell average instead of the best constant in the oscillation.
    #[arg(long)]
    pub osc_average: bool,
    /// Per-level contributions as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Adds the level-0 value `|∫ f|` to a norm that lacks it.
fn with_mean(mut r: NormReport, mean: &Surd, params: &BesovParams) -> NormReport {
    let m = Real::Exact(mean.clone()).abs();
    r.value = match &params.q {
        QExponent::Infinite => r.value.max(&m),
        QExponent::Finite(q) => m.abs_pow(q).add(&r.value.abs_pow(q)).abs_pow(&q.recip()),
    };
    r.per_level.insert(0, besov_core::norms::LevelValue { level: 0, value: m });
    r
}

fn function_norms(f: &StepFunction<Surd>, g: &Grid, params: &BesovParams, a: &NormArgs) -> Result<Vec<NormReport>, Fail> {
    let level0 = !a.no_level0;
    let all = a.method == Method::All;
    let mean = f.integral(g)?;
    let mut out = Vec::new();
    if all || a.method == Method::Rep {
        let mut rep = greedy_atomic_decomposition(f, params, g)?;
        if !level0 {
            rep.coeffs.remove(&besov_core::CellAddress::root());
        }
        out.push(rep_norm(&rep, params));
    }
    if all || a.method == Method::Martingale {
        out.push(martingale_norm(f, params, g, level0)?);
    }
    if all || a.method == Method::Osc {
        let mode = if a.osc_average { OscMode::DistanceToAverage } else { OscMode::InfOverConstants };
        let r = oscillation_norm(f, params, g, mode)?;
        out.push(if level0 { with_mean(r, &mean, params) } else { r });
    }
    if all || a.method == Method::Haar {
        let r = haar_norm(&haar_expand(f, g)?, params, g)?;
        out.push(if level0 { with_mean(r, &mean, params) } else { r });
    }
    Ok(out)
}

pub fn run(a: NormArgs) -> Result<(), Fail> {
    let params = BesovParams::parse(&a.params)?;
    let doc = read_json(&a.input)?;
    let reports = if doc.get("coeffs").is_some() {
        if !matches!(a.method, Method::Rep | Method::All) {
            return Err(Fail::Core(besov_core::Error::InvalidParameter(
                "an atomic representation only has the rep norm".into(),
            )));
        }
        let (_, rep) = atomic_rep_from_json(&doc)?;
        vec![rep_norm(&rep, &params)]
    } else {
        let (g, f) = stepfun_from_json(&doc)?;
        function_norms(&f, &g, &params, &a)?
    };
    if let Some(p) = &a.csv {
        let rows: Vec<Vec<String>> = reports
            .iter()
            .flat_map(|r| {
                r.per_level.iter().map(|l| vec![r.method.clone(), l.level.to_string(), l.value.decimal()])
            })
            .collect();
        write_csv(p, &["method", "level", "value"], &rows)?;
    }
    let list: Vec<Value> = reports.iter().map(NormReport::to_json).collect();
    let v = json!({
        "input": a.input.file_name().map(|n| n.to_string_lossy().into_owned()),
        "params": params.to_json(),
        "level0": !a.no_level0,
        "norms": list,
    });
    emit(&v, a.out.as_deref())
}
