use serde_json::{json, Value};
use std::collections::BTreeMap;

use super::StepFunction;
use crate::error::{Error, Result};
use crate::exact::Surd;
use crate::grid::{grid_from_json, grid_to_json, parse_grid_spec, CellAddress, Grid};
use crate::norms::AtomicRep;
use crate::scalar::Scalar;

/// Reads the `grid` field: a full grid document or a short spec such as `"nadic:2"`.
pub fn grid_value(v: &Value) -> Result<Grid> {
    match v.get("grid") {
        Some(Value::String(s)) => {
            let depth = v.get("depth").and_then(Value::as_u64).unwrap_or(0) as usize;
            parse_grid_spec(s, depth)
        }
        Some(g @ Value::Object(_)) => grid_from_json(g),
        _ => Err(Error::Parse("document needs a grid".into())),
    }
}

pub(crate) fn entries_from_json(v: &Value, key: &str) -> Result<BTreeMap<CellAddress, Surd>> {
    let arr = v.get(key).and_then(Value::as_array).ok_or_else(|| Error::Parse(format!("missing {key:?} array")))?;
    let mut out = BTreeMap::new();
    for e in arr {
        let addr: CellAddress = serde_json::from_value(e.get("address").cloned().unwrap_or(Value::Null))
            .map_err(|err| Error::Parse(err.to_string()))?;
        let val = e.get("value").and_then(Value::as_str).ok_or_else(|| Error::Parse("entry needs a string value".into()))?;
        if out.insert(addr.clone(), val.parse::<Surd>()?).is_some() {
            return Err(Error::OverlappingSupport(addr.clone(), addr));
        }
    }
    Ok(out)
}

/// `{ "grid": ..., "pieces": [ {"address": [...], "value": "num/den"} ] }`.
pub fn stepfun_from_json(v: &Value) -> Result<(Grid, StepFunction<Surd>)> {
    let grid = grid_value(v)?;
    let f = StepFunction::new(entries_from_json(v, "pieces")?)?;
    Ok((grid, f))
}

/// `{ "grid": ..., "coeffs": [ {"address": [...], "value": "..."} ] }`, the `s_Q` of `Σ s_Q a_Q`.
pub fn atomic_rep_from_json(v: &Value) -> Result<(Grid, AtomicRep<Surd>)> {
    let grid = grid_value(v)?;
    let coeffs = entries_from_json(v, "coeffs")?;
    for a in coeffs.keys() {
        grid.materialize(a)?;
    }
    Ok((grid, AtomicRep::new(coeffs)))
}

pub fn stepfun_to_json<T: Scalar>(f: &StepFunction<T>, grid: &Grid, grid_depth: usize) -> Result<Value> {
    let pieces: Vec<Value> =
        f.pieces().iter().map(|(k, v)| json!({"address": k, "value": v.render()})).collect();
    Ok(json!({"grid": grid_to_json(grid, grid_depth)?, "pieces": pieces}))
}
