//! Serde helpers: rationals travel as `"num/den"` strings.

use serde::{Deserialize, Deserializer, Serializer};

use crate::Rational;

pub use crate::grid::rat_str;

pub mod rat {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&rat_str(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        crate::parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

pub mod opt_rat {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match r {
            Some(r) => s.serialize_str(&rat_str(r)),
            None => s.serialize_none(),
        }
    }
}

pub mod vec_rat {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for r in v {
            seq.serialize_element(&rat_str(r))?;
        }
        seq.end()
    }
}
