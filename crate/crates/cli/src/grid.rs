use std::path::PathBuf;

use besov_core::grid::{grid_from_json, grid_to_json, parse_grid_spec, regroup_by_measure, validate_good_grid, validate_recalibration};
use besov_core::{parse_rational, Grid};
use clap::{Args, Subcommand};
use serde_json::{json, Value};

use crate::out::{emit, read_json, write_csv};
use crate::Fail;

#[derive(Args, Clone)]
pub struct GridSource {
    /// N-adic grid.
    #[arg(long, group = "source")]
    pub nadic: Option<u32>,
    /// Binary grid splitting each cell at the fraction `a`.
    #[arg(long, group = "source")]
    pub weighted: Option<String>,
    /// Short spec: nadic:N, weighted:a, dyadic, triadic.
    #[arg(long, group = "source")]
    pub spec: Option<String>,
    #[arg(long, default_value_t = 10)]
    pub depth: usize,
    /// Regroup the levels by measure.
    #[arg(long)]
    pub regroup: bool,
    /// Threshold ratio for --regroup.
    #[arg(long, default_value = "1/2")]
    pub ratio: String,
}

impl GridSource {
    pub fn build(&self) -> Result<Grid, Fail> {
        let g = match (&self.nadic, &self.weighted, &self.spec) {
            (Some(n), _, _) => Grid::nadic(*n, self.depth)?,
            (_, Some(a), _) => Grid::weighted_binary(parse_rational(a)?, self.depth)?,
            (_, _, Some(s)) => parse_grid_spec(s, self.depth)?,
            _ => Grid::nadic(2, self.depth)?,
        };
        if self.regroup {
            return Ok(regroup_by_measure(&g, self.depth, parse_rational(&self.ratio)?)?);
        }
        Ok(g)
    }
}

#[derive(Subcommand)]
pub enum GridCmd {
    /// Build a grid and report its constants.
    Build {
        #[command(flatten)]
        src: GridSource,
        /// Validate and exit 2 on a violation.
        #[arg(long)]
        check: bool,
        /// Per-level measure statistics as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Validate a grid interchange document.
    Check {
        input: PathBuf,
        /// Levels to validate; defaults to the document depth.
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the interchange document of a grid.
    Export {
        #[command(flatten)]
        src: GridSource,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Validation report and whether the grid passed.
fn check(g: &Grid, depth: usize, regrouped: bool) -> Result<(Value, bool, Vec<Vec<String>>), Fail> {
    if regrouped {
        let c = validate_recalibration(g, depth)?;
        let rows = c
            .level_stats
            .iter()
            .map(|s| vec![s.level.to_string(), s.cells.to_string(), s.max_measure.to_string(), s.min_measure.to_string()])
            .collect();
        let v = serde_json::to_value(&c).map_err(|e| Fail::Io(e.to_string()))?;
        return Ok((json!({"recalibration": v}), c.passed, rows));
    }
    let meta = validate_good_grid(g, depth)?;
    let rows = meta
        .level_stats
        .iter()
        .map(|s| vec![s.level.to_string(), s.cells.to_string(), s.max_measure.to_string(), s.min_measure.to_string()])
        .collect();
    let v = serde_json::to_value(&meta).map_err(|e| Fail::Io(e.to_string()))?;
    Ok((json!({"meta": v}), true, rows))
}

pub fn run(cmd: GridCmd) -> Result<(), Fail> {
    match cmd {
        GridCmd::Build { src, check: do_check, csv, out } => {
            let g = src.build()?;
            let mut report = json!({
                "generator": besov_core::grid::generator_to_json(g.generator()),
                "depth": src.depth,
            });
            if do_check || csv.is_some() {
                let (v, passed, rows) = check(&g, src.depth, src.regroup)?;
                report["check"] = v;
                report["passed"] = json!(passed);
                if let Some(p) = &csv {
                    write_csv(p, &["level", "cells", "max_measure", "min_measure"], &rows)?;
                }
                if do_check && !passed {
                    return Err(Fail::Invalid(report));
                }
            }
            emit(&report, out.as_deref())
        }
        GridCmd::Check { input, depth, out } => {
            let doc = read_json(&input)?;
            let g = grid_from_json(&doc)?;
            let depth = depth.unwrap_or(g.depth());
            let regrouped = matches!(g.generator(), besov_core::grid::Generator::Regrouped { .. });
            let (mut v, passed, _) = check(&g, depth, regrouped)?;
            v["passed"] = json!(passed);
            if !passed {
                return Err(Fail::Invalid(v));
            }
            emit(&v, out.as_deref())
        }
        GridCmd::Export { src, out } => {
            let g = src.build()?;
            emit(&grid_to_json(&g, src.depth)?, out.as_deref())
        }
    }
}
