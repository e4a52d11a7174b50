use serde_json::{json, Value};

use super::BesovParams;
use crate::exact::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct LevelValue {
    pub level: usize,
    pub value: Real,
}

/// A norm value with its per-level contributions.
#[derive(Clone, Debug, PartialEq)]
pub struct NormReport {
    pub method: String,
    pub params: BesovParams,
    pub value: Real,
    pub per_level: Vec<LevelValue>,
}

fn real_json(r: &Real) -> Value {
    json!({"value": r.decimal(), "error_bound": r.error_string(), "exact": r.symbolic()})
}

impl NormReport {
    pub fn to_json(&self) -> Value {
        json!({
            "method": self.method,
            "params": self.params.to_json(),
            "value": self.value.decimal(),
            "error_bound": self.value.error_string(),
            "exact": self.value.symbolic(),
            "per_level": self.per_level.iter().map(|l| {
                let mut v = real_json(&l.value);
                v["level"] = json!(l.level);
                v
            }).collect::<Vec<_>>(),
        })
    }
}
