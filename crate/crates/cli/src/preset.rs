use std::path::{Path, PathBuf};

use clap::Subcommand;
use serde_json::json;

use crate::out::emit;
use crate::Fail;

#[derive(Subcommand)]
pub enum PresetCmd {
    /// Names and command lines of the presets.
    List,
    /// Run one preset (or `all`), writing its reports into a directory.
    Run {
        name: String,
        #[arg(long, default_value = "reports")]
        out_dir: PathBuf,
        #[arg(long, default_value_t = besov_core::sample::DEFAULT_SEED)]
        seed: u64,
    },
}

const NAMES: [&str; 5] = ["regroup", "cantor", "indicator", "norms", "exotic"];

/// Command lines of a preset, with `{dir}` and `{seed}` placeholders.
fn steps(name: &str) -> Option<Vec<&'static str>> {
    Some(match name {
        "regroup" => vec![
            "grid build --weighted 1/5 --depth 10 --regroup --check --csv {dir}/regroup.csv --out {dir}/regroup.json",
        ],
        "cantor" => vec!["decompose cantor --depth 12 --csv {dir}/cantor.csv --out {dir}/cantor.json"],
        "indicator" => vec![
            "decompose indicator --interval 1/3,3/4 --depth 24 --csv {dir}/indicator.csv --out {dir}/indicator.json",
        ],
        "norms" => vec![
            "sample --seed {seed} --depth 8 --out {dir}/sample.json",
            "norm {dir}/sample.json --params s=1/4,p=2,q=2 --csv {dir}/norms.csv --out {dir}/norms.json",
        ],
        "exotic" => vec![
            "exotic profile --k-max 24 --csv {dir}/profile.csv --out {dir}/profile.json",
            "exotic report --p 2 --q 1 --s 1/5 --nmax 3 --out {dir}/exotic_report.json",
        ],
        _ => return None,
    })
}

fn expand(line: &str, dir: &Path, seed: u64) -> Vec<String> {
    let d = dir.to_string_lossy();
    line.split_whitespace().map(|t| t.replace("{dir}", &d).replace("{seed}", &seed.to_string())).collect()
}

pub fn run(cmd: PresetCmd) -> Result<(), Fail> {
    match cmd {
        PresetCmd::List => {
            let v: serde_json::Map<String, serde_json::Value> =
                NAMES.iter().map(|n| (n.to_string(), json!(steps(n).unwrap()))).collect();
            emit(&json!(v), None)
        }
        PresetCmd::Run { name, out_dir, seed } => {
            let names: Vec<&str> = if name == "all" { NAMES.to_vec() } else { vec![name.as_str()] };
            std::fs::create_dir_all(&out_dir).map_err(|e| Fail::Io(format!("{}: {e}", out_dir.display())))?;
            let mut done = Vec::new();
            for n in names {
                let lines = steps(n).ok_or_else(|| {
                    Fail::Core(besov_core::Error::InvalidParameter(format!("unknown preset {n:?}; see `preset list`")))
                })?;
                for l in lines {
                    let args = expand(l, &out_dir, seed);
                    crate::dispatch(args.clone())?;
                    done.push(args.join(" "));
                }
            }
            emit(&json!({"seed": seed, "out_dir": out_dir.to_string_lossy(), "ran": done}), None)
        }
    }
}
