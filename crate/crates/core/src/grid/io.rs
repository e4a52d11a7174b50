use serde_json::{json, Map, Value};
use std::collections::BTreeMap;

use super::{CellAddress, Generator, Grid, PiecewiseLinear};
use crate::error::{Error, Result};
use crate::{parse_rational, Rational};

/// `"num/den"` text form used in every JSON document.
pub fn rat_str(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn perr(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

fn get_rat(v: &Value, key: &str) -> Result<Rational> {
    let s = v.get(key).and_then(Value::as_str).ok_or_else(|| perr(format!("missing string field {key:?}")))?;
    parse_rational(s)
}

fn cells_to_json(cells: &BTreeMap<CellAddress, (Rational, Rational)>) -> Value {
    Value::Array(
        cells
            .iter()
            .map(|(addr, (a, b))| json!({"address": addr, "a": rat_str(a), "b": rat_str(b)}))
            .collect(),
    )
}

fn cells_from_json(v: &Value) -> Result<BTreeMap<CellAddress, (Rational, Rational)>> {
    let arr = v.as_array().ok_or_else(|| perr("cells must be an array"))?;
    let mut out = BTreeMap::new();
    for c in arr {
        let addr: CellAddress =
            serde_json::from_value(c.get("address").cloned().unwrap_or(Value::Null)).map_err(|e| perr(e.to_string()))?;
        out.insert(addr, (get_rat(c, "a")?, get_rat(c, "b")?));
    }
    Ok(out)
}

pub fn generator_to_json(g: &Generator) -> Value {
    match g {
        Generator::NAdic { n } => json!({"kind": "nadic", "n": n}),
        Generator::WeightedBinary { a } => json!({"kind": "weighted", "a": rat_str(a)}),
        Generator::ExplicitTree { cells } => json!({"kind": "explicit", "cells": cells_to_json(cells)}),
        Generator::Image { base, map } => json!({
            "kind": "image",
            "base": generator_to_json(base.generator()),
            "map": map.knots().iter().map(|(x, y)| json!([rat_str(x), rat_str(y)])).collect::<Vec<_>>(),
        }),
        Generator::Regrouped { base, ratio } => json!({
            "kind": "regrouped",
            "base": generator_to_json(base.generator()),
            "ratio": rat_str(ratio),
        }),
    }
}

pub fn generator_from_json(v: &Value, depth: usize, cells: Option<&Value>) -> Result<Grid> {
    let kind = v.get("kind").and_then(Value::as_str).ok_or_else(|| perr("generator needs a kind"))?;
    match kind {
        "nadic" => {
            let n = v.get("n").and_then(Value::as_u64).ok_or_else(|| perr("nadic needs n"))?;
            Grid::nadic(n as u32, depth)
        }
        "weighted" => Grid::weighted_binary(get_rat(v, "a")?, depth),
        "explicit" => {
            let src = v.get("cells").or(cells).ok_or_else(|| perr("explicit grid needs cells"))?;
            Grid::explicit(cells_from_json(src)?)
        }
        "image" => {
            let base = generator_from_json(v.get("base").ok_or_else(|| perr("image needs base"))?, depth, None)?;
            let knots = v
                .get("map")
                .and_then(Value::as_array)
                .ok_or_else(|| perr("image needs map"))?
                .iter()
                .map(|k| {
                    let x = k.get(0).and_then(Value::as_str).ok_or_else(|| perr("bad knot"))?;
                    let y = k.get(1).and_then(Value::as_str).ok_or_else(|| perr("bad knot"))?;
                    Ok((parse_rational(x)?, parse_rational(y)?))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Grid::image(base, PiecewiseLinear::new(knots)?))
        }
        "regrouped" => {
            let base = generator_from_json(v.get("base").ok_or_else(|| perr("regrouped needs base"))?, depth, None)?;
            super::regroup_by_measure(&base, depth, get_rat(v, "ratio")?)
        }
        other => Err(perr(format!("unknown generator kind {other:?}"))),
    }
}

/// Interchange document: generator, nominal depth and the cells down to `depth`.
pub fn grid_to_json(grid: &Grid, depth: usize) -> Result<Value> {
    let mut cells = BTreeMap::new();
    let mut level = vec![grid.root()];
    for k in 0..=depth {
        for c in &level {
            cells.insert(c.address.clone(), (c.a.clone(), c.b.clone()));
        }
        if k == depth {
            break;
        }
        let mut next = Vec::new();
        for c in &level {
            next.extend(grid.children(c)?);
            if next.len() as u64 > super::MAX_VALIDATION_CELLS {
                return Err(Error::Guard(next.len() as u64));
            }
        }
        level = next;
    }
    let mut m = Map::new();
    m.insert("generator".into(), generator_to_json(grid.generator()));
    m.insert("depth".into(), json!(depth));
    m.insert("cells".into(), cells_to_json(&cells));
    Ok(Value::Object(m))
}

pub fn grid_from_json(v: &Value) -> Result<Grid> {
    let gen = v.get("generator").ok_or_else(|| perr("grid needs a generator"))?;
    let depth = v.get("depth").and_then(Value::as_u64).unwrap_or(0) as usize;
    generator_from_json(gen, depth, v.get("cells"))
}

/// Short grid names: `nadic:N`, `weighted:a`, `dyadic`, `triadic`.
pub fn parse_grid_spec(s: &str, depth: usize) -> Result<Grid> {
    match s.trim() {
        "dyadic" => Grid::nadic(2, depth),
        "triadic" => Grid::nadic(3, depth),
        t => match t.split_once(':') {
            Some(("nadic", n)) => Grid::nadic(n.parse().map_err(|_| perr(format!("bad base {n:?}")))?, depth),
            Some(("weighted", a)) => Grid::weighted_binary(parse_rational(a)?, depth),
            _ => Err(perr(format!("unknown grid spec {s:?}; use nadic:N or weighted:a"))),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat;

    #[test]
    fn round_trip_weighted_and_image() {
        let g = Grid::weighted_binary(rat(1, 5), 3).unwrap();
        let v = grid_to_json(&g, 3).unwrap();
        let h = grid_from_json(&v).unwrap();
        assert_eq!(grid_to_json(&h, 3).unwrap(), v);
        assert_eq!(v["cells"][1]["b"], "1/5");

        let map = PiecewiseLinear::new(vec![(rat(0, 1), rat(0, 1)), (rat(1, 3), rat(1, 2)), (rat(1, 1), rat(1, 1))]).unwrap();
        let img = Grid::image(Grid::nadic(3, 2).unwrap(), map);
        let v = grid_to_json(&img, 2).unwrap();
        assert_eq!(grid_to_json(&grid_from_json(&v).unwrap(), 2).unwrap(), v);
    }

    #[test]
    fn explicit_round_trip() {
        let v = grid_to_json(&Grid::nadic(2, 2).unwrap(), 2).unwrap();
        let explicit = json!({"generator": {"kind": "explicit"}, "depth": 2, "cells": v["cells"].clone()});
        let g = grid_from_json(&explicit).unwrap();
        assert_eq!(grid_to_json(&g, 2).unwrap()["cells"], v["cells"]);
    }
}
