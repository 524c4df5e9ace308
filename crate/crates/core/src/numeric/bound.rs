//! Serde helpers for interval bounds that may be infinite.
//!
//! JSON has no infinity, so an infinite bound is written as `null` and read
//! back as the infinity appropriate for its side.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

fn write<S: Serializer>(v: f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        Some(v).serialize(s)
    } else {
        None::<f64>.serialize(s)
    }
}

/// A lower bound; `null` means negative infinity.
pub mod lower {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        write(*v, s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NEG_INFINITY))
    }
}

/// An upper bound; `null` means positive infinity.
pub mod upper {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        write(*v, s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}
