use std::path::PathBuf;

use besov_core::decompose::{
    atom_transfer, cantor_complement_decomposition, hull_families, indicator_decomposition,
    interval_partition_families, maximal_families, IntervalQuery, Target,
};
use besov_core::grid::{parse_grid_spec, rat_str};
use besov_core::{BesovParams, CellAddress, Error, Grid};
use clap::Subcommand;
use serde_json::{json, Value};

use crate::out::{emit, write_csv};
use crate::Fail;

#[derive(Subcommand)]
pub enum DecomposeCmd {
    /// Atomic decomposition of an indicator by maximal cells.
    Indicator {
        #[arg(long, default_value = "dyadic")]
        grid: String,
        /// `a,b`
        #[arg(long, group = "target")]
        interval: Option<String>,
        /// Cells of the grid, `;`-separated addresses such as `0,1;1`.
        #[arg(long, group = "target")]
        cells: Option<String>,
        #[arg(long, default_value = "s=1/4,p=2,q=2")]
        params: String,
        #[arg(long, default_value_t = 16)]
        depth: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Maximal triadic cells of a triadic cell minus the Cantor set.
    Cantor {
        #[arg(long, default_value_t = 12)]
        depth: usize,
        /// Address of the starting cell, such as `0,2`; the root by default.
        #[arg(long, default_value = "")]
        cell: String,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-expands an atom of one grid in atoms of another.
    Transfer {
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[arg(long)]
        cell: String,
        #[arg(long, default_value = "s=1/4,p=2,q=2")]
        params: String,
        #[arg(long, default_value_t = 16)]
        depth: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Families of cells covering an interval.
    Families {
        #[arg(long, default_value = "dyadic")]
        grid: String,
        #[arg(long)]
        interval: String,
        #[arg(long, default_value_t = 16)]
        depth: usize,
        /// `maximal`, `ladder` (two-sided from `k0`) or `hull`.
        #[arg(long, default_value = "maximal")]
        kind: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

pub fn parse_address(s: &str) -> Result<CellAddress, Fail> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(CellAddress::root());
    }
    let digits = s
        .split(',')
        .map(|d| d.trim().parse::<u8>().map_err(|_| Error::Parse(format!("bad address {s:?}"))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CellAddress::new(digits))
}

fn sums_csv(path: &Option<PathBuf>, rows: Vec<Vec<String>>) -> Result<(), Fail> {
    match path {
        Some(p) => write_csv(p, &["level", "sum"], &rows),
        None => Ok(()),
    }
}

fn grid(spec: &str, depth: usize) -> Result<Grid, Fail> {
    Ok(parse_grid_spec(spec, depth)?.with_depth_limit(depth.max(64) * 4))
}

pub fn run(cmd: DecomposeCmd) -> Result<(), Fail> {
    match cmd {
        DecomposeCmd::Indicator { grid: spec, interval, cells, params, depth, csv, out } => {
            let g = grid(&spec, depth)?;
            let params = BesovParams::parse(&params)?;
            let target = match (interval, cells) {
                (Some(i), _) => Target::Interval(IntervalQuery::parse(&i)?),
                (_, Some(c)) => Target::Cells(c.split(';').map(parse_address).collect::<Result<_, _>>()?),
                _ => return Err(Fail::Core(Error::InvalidParameter("give --interval or --cells".into()))),
            };
            let d = indicator_decomposition(&g, &target, &params, depth)?;
            sums_csv(&csv, d.level_sums.iter().map(|(k, v)| vec![k.to_string(), v.to_f64().to_string()]).collect())?;
            let mut v = d.to_json();
            v["grid"] = json!(spec);
            v["params"] = params.to_json();
            v["depth"] = json!(depth);
            v["residual_log2"] = log2(&d.ladder.residual);
            emit(&v, out.as_deref())
        }
        DecomposeCmd::Cantor { depth, cell, csv, out } => {
            let g = Grid::nadic(3, depth + 1)?;
            let r = cantor_complement_decomposition(&g, &parse_address(&cell)?, depth)?;
            sums_csv(&csv, r.level_sums.iter().map(|(k, v)| vec![k.to_string(), rat_str(v)]).collect())?;
            let mut v = r.to_json();
            v["all_sums_equal"] = json!(r.level_sums.values().all(|s| s == r.level_sums.values().next().unwrap()));
            emit(&v, out.as_deref())
        }
        DecomposeCmd::Transfer { from, to, cell, params, depth, csv, out } => {
            let src = grid(&from, depth)?;
            let dst = grid(&to, depth)?;
            let params = BesovParams::parse(&params)?;
            let t = atom_transfer(&src, &dst, &parse_address(&cell)?, &params, depth)?;
            sums_csv(&csv, t.level_sums.iter().map(|(k, v)| vec![k.to_string(), v.decimal()]).collect())?;
            let mut v = t.to_json();
            v["from"] = json!(from);
            v["to"] = json!(to);
            v["params"] = params.to_json();
            v["depth"] = json!(depth);
            v["residual"] = json!(rat_str(&t.ladder.residual));
            v["relative_residual"] = json!(rat_str(&(&t.ladder.residual / &t.ladder.target_measure)));
            emit(&v, out.as_deref())
        }
        DecomposeCmd::Families { grid: spec, interval, depth, kind, out } => {
            let g = grid(&spec, depth)?;
            let q = IntervalQuery::parse(&interval)?;
            let v: Value = match kind.as_str() {
                "maximal" => maximal_families(&g, &Target::Interval(q), depth)?.to_json(),
                "ladder" => interval_partition_families(&g, &q, depth)?.to_json(),
                "hull" => hull_families(&g, &q)?.to_json(),
                k => return Err(Fail::Core(Error::InvalidParameter(format!("unknown family kind {k:?}")))),
            };
            emit(&json!({"grid": spec, "interval": interval, "kind": kind, "families": v}), out.as_deref())
        }
    }
}

fn log2(r: &besov_core::Rational) -> Value {
    let x = besov_core::Real::from_rational(r.clone()).to_f64();
    if x > 0.0 {
        json!(x.log2())
    } else {
        Value::Null
    }
}
