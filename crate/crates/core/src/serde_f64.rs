//! Serde adapter for `f64` fields that may hold ±∞ (JSON has no literal for
//! them). Non-finite values are written as the strings `"inf"`, `"-inf"` or
//! `"NaN"`; plain numbers are accepted on input as well.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serializer};

pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_str(&v.to_string())
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Repr {
    Num(f64),
    Text(String),
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    match Repr::deserialize(d)? {
        Repr::Num(v) => Ok(v),
        Repr::Text(t) => t
            .trim()
            .parse::<f64>()
            .map_err(|_| D::Error::custom(format!("expected a number or inf/-inf, got {t:?}"))),
    }
}
