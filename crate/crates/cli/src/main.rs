//! `besov`: grids, norms, decompositions and exotic functions from the command line.
//!
//! Every report is JSON with sorted keys. Exit codes: 0 success, 2 validation or parameter
//! failure, 3 resource guard.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

mod decompose;
mod exotic;
mod grid;
mod norm;
mod out;
mod preset;

#[derive(Parser)]
#[command(name = "besov", version, about = "Besov-type spaces on good grids of [0,1]")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build, validate and export grids.
    Grid {
        #[command(subcommand)]
        cmd: grid::GridCmd,
    },
    /// Norms of a step function or an atomic representation.
    Norm(norm::NormArgs),
    /// Decompositions into maximal cells and atoms.
    Decompose {
        #[command(subcommand)]
        cmd: decompose::DecomposeCmd,
    },
    /// Grid comparison and functions separating two grids.
    Exotic {
        #[command(subcommand)]
        cmd: exotic::ExoticCmd,
    },
    /// A random step function on the dyadic grid.
    Sample {
        #[arg(long, default_value_t = besov_core::sample::DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        depth: usize,
        /// Probability that a cell splits further.
        #[arg(long, default_value_t = 0.7)]
        split: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fixed experiment presets writing their reports into a directory.
    Preset {
        #[command(subcommand)]
        cmd: preset::PresetCmd,
    },
}

/// Why a command did not succeed.
#[derive(Debug)]
pub enum Fail {
    Core(besov_core::Error),
    /// A check ran and failed; the report is printed.
    Invalid(serde_json::Value),
    Io(String),
}

impl From<besov_core::Error> for Fail {
    fn from(e: besov_core::Error) -> Self {
        Fail::Core(e)
    }
}

impl Fail {
    fn code(&self) -> u8 {
        match self {
            Fail::Core(e) if e.is_resource_guard() => 3,
            _ => 2,
        }
    }
}

fn run(cli: Cli) -> Result<(), Fail> {
    match cli.cmd {
        Cmd::Grid { cmd } => grid::run(cmd),
        Cmd::Norm(a) => norm::run(a),
        Cmd::Decompose { cmd } => decompose::run(cmd),
        Cmd::Exotic { cmd } => exotic::run(cmd),
        Cmd::Sample { seed, depth, split, out } => {
            let f = besov_core::sample::random_step_function(&mut besov_core::sample::rng(seed), 2, depth, split);
            let g = besov_core::Grid::nadic(2, depth)?;
            let mut v = besov_core::stepfun::stepfun_to_json(&f, &g, 0)?;
            v["seed"] = json!(seed);
            v["generator"] = json!("ChaCha8 (rand_chacha), seed_from_u64");
            out::emit(&v, out.as_deref())
        }
        Cmd::Preset { cmd } => preset::run(cmd),
    }
}

/// Runs a command line given without the program name.
pub fn dispatch(args: Vec<String>) -> Result<(), Fail> {
    let cli = Cli::try_parse_from(std::iter::once("besov".to_string()).chain(args))
        .map_err(|e| Fail::Core(besov_core::Error::Parse(e.to_string())))?;
    run(cli)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let code = f.code();
            match &f {
                Fail::Invalid(report) => print!("{}", out::render(report)),
                Fail::Core(e) => eprint!(
                    "{}",
                    out::render(&json!({"error": e.to_string(), "resource_guard": e.is_resource_guard()}))
                ),
                Fail::Io(m) => eprint!("{}", out::render(&json!({"error": m}))),
            }
            ExitCode::from(code)
        }
    }
}
