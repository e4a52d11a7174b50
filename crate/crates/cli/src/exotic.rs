use std::path::PathBuf;

use besov_core::exotic::{
    bilipschitz_diagnostic, build_exotic_function, conjugacy_check, exotic_norm_report, extremal_words, jstar_profile,
    select_exotic_families, verify_selection, ExoticSelection, PROFILE_GUARD,
};
use besov_core::grid::parse_grid_spec;
use besov_core::{parse_rational, BesovParams, Grid};
use clap::{Args, Subcommand};
use serde_json::json;

use crate::out::{emit, write_csv};
use crate::Fail;

/// Nominal depth of the two grids; cells deeper than this are computed on demand.
const NOMINAL_DEPTH: usize = 40;

#[derive(Args, Clone)]
pub struct Pair {
    /// The grid `∘` whose cells are selected.
    #[arg(long, default_value = "weighted:1/5")]
    pub circ: String,
    /// The grid `⋆` measured against `∘`.
    #[arg(long, default_value = "dyadic")]
    pub star: String,
    /// Hard depth limit of both grids.
    #[arg(long, default_value_t = 16384)]
    pub depth_limit: usize,
}

impl Pair {
    fn grids(&self) -> Result<(Grid, Grid), Fail> {
        let g = |s: &str| -> Result<Grid, Fail> {
            Ok(parse_grid_spec(s, NOMINAL_DEPTH)?.with_depth_limit(self.depth_limit))
        };
        Ok((g(&self.circ)?, g(&self.star)?))
    }
}

#[derive(Args, Clone)]
pub struct Construction {
    #[command(flatten)]
    pub pair: Pair,
    #[arg(long, default_value = "2")]
    pub p: String,
    #[arg(long, default_value = "1")]
    pub q: String,
    #[arg(long, default_value = "1/5")]
    pub s: String,
    /// Minimal gap between the `j*_0` levels of selected cells.
    #[arg(long, default_value_t = 4)]
    pub sep: usize,
    /// Number of groups; group `n` needs a harmonic sum above `2^(n q)` (or `2^(n p)`).
    #[arg(long, default_value_t = 3)]
    pub nmax: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Construction {
    fn params(&self) -> Result<BesovParams, Fail> {
        Ok(BesovParams::finite(parse_rational(&self.s)?, parse_rational(&self.p)?, parse_rational(&self.q)?)?)
    }

    fn select(&self) -> Result<ExoticSelection, Fail> {
        let (circ, star) = self.pair.grids()?;
        let sel = select_exotic_families(&circ, &star, &self.params()?, self.sep, self.nmax)?;
        let check = verify_selection(&sel);
        if !check.ok() {
            return Err(Fail::Invalid(json!({"selection": sel.to_json(), "verification": check.to_json()})));
        }
        Ok(sel)
    }
}

#[derive(Subcommand)]
pub enum ExoticCmd {
    /// `j*_0` over the cells of one level, or its spread by level with --k-max.
    Profile {
        #[command(flatten)]
        pair: Pair,
        #[arg(long, default_value_t = 10)]
        k: usize,
        /// Spread on extremal words for every level up to this one.
        #[arg(long)]
        k_max: Option<usize>,
        /// Only the extremal words of level k, even when all cells fit the guard.
        #[arg(long)]
        extremal: bool,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Select the cell families and verify them.
    Select(Construction),
    /// Build the Haar expansion of the separating function.
    Build(Construction),
    /// Norm report of the separating function with its closed forms.
    Report {
        #[command(flatten)]
        c: Construction,
        /// Also transfer the function to the other grid, this many levels below each pair.
        #[arg(long)]
        transfer_levels: Option<usize>,
        /// Groups used for the transfer.
        #[arg(long, default_value_t = 1)]
        transfer_nmax: usize,
    },
    /// Conjugacy of a binary grid to the dyadic grid on level endpoints.
    Phi {
        #[arg(long, default_value = "weighted:1/5")]
        grid: String,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, default_value_t = 12)]
        t: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

pub fn run(cmd: ExoticCmd) -> Result<(), Fail> {
    match cmd {
        ExoticCmd::Profile { pair, k, k_max, extremal, csv, out } => {
            let (circ, star) = pair.grids()?;
            let mut v = json!({"circ": pair.circ, "star": pair.star});
            if let Some(km) = k_max {
                let r = bilipschitz_diagnostic(&circ, &star, km)?;
                if let Some(p) = &csv {
                    let rows: Vec<Vec<String>> =
                        r.rows.iter().map(|x| vec![x.k.to_string(), x.min.to_string(), x.max.to_string()]).collect();
                    write_csv(p, &["k", "min", "max"], &rows)?;
                }
                v["diagnostic"] = r.to_json();
            } else {
                let exhaustive = !extremal && k < 64 && (1u64 << k) <= PROFILE_GUARD;
                let words = extremal_words(k);
                let prof = jstar_profile(&circ, &star, k, if exhaustive { None } else { Some(&words) })?;
                if let Some(p) = &csv {
                    let rows: Vec<Vec<String>> = prof
                        .values
                        .iter()
                        .map(|(a, j)| vec![a.to_string(), j.to_string()])
                        .collect();
                    write_csv(p, &["address", "jstar"], &rows)?;
                }
                v["profile"] = prof.to_json();
            }
            emit(&v, out.as_deref())
        }
        ExoticCmd::Select(c) => {
            let sel = c.select()?;
            let check = verify_selection(&sel);
            emit(&json!({"selection": sel.to_json(), "verification": check.to_json()}), c.out.as_deref())
        }
        ExoticCmd::Build(c) => {
            let sel = c.select()?;
            let f = build_exotic_function(&sel)?;
            emit(&json!({"selection": sel.to_json(), "function": f.to_json()}), c.out.as_deref())
        }
        ExoticCmd::Report { c, transfer_levels, transfer_nmax } => {
            let sel = c.select()?;
            let f = build_exotic_function(&sel)?;
            let rep = exotic_norm_report(&f, &sel, transfer_levels.map(|x| (transfer_nmax, x)))?;
            let mut v = rep.to_json();
            v["circ"] = json!(c.pair.circ);
            v["star"] = json!(c.pair.star);
            v["sep"] = json!(c.sep);
            v["checks"] = json!({
                "round_trip": rep.round_trip,
                "closed_form_exact": rep.closed_form_exact(),
                "increments_exceed_one": rep.increments_exceed_one(),
                "bound_truncated_ok": rep.bound.truncated_ok(),
            });
            emit(&v, c.out.as_deref())
        }
        ExoticCmd::Phi { grid, k, t, out } => {
            let g = parse_grid_spec(&grid, k.max(t))?;
            let c = conjugacy_check(&g, k, t)?;
            let mut v = c.to_json();
            v["grid"] = json!(grid);
            if !c.ok() {
                return Err(Fail::Invalid(v));
            }
            emit(&v, out.as_deref())
        }
    }
}
