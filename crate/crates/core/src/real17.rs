//! Reals on the wire: decimal strings with 17 significant digits.
//!
//! Seventeen significant digits are enough for every finite `f64` to survive
//! a text round-trip bit for bit. Use with `#[serde(with = "real17")]` on
//! `f64` fields, or the nested modules for vectors, pairs and complex numbers.

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serializer};

use crate::error::{Error, Result};

pub fn format(x: f64) -> String {
    if x.is_finite() {
        format!("{:.16e}", x)
    } else if x.is_nan() {
        "NaN".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

pub fn parse(s: &str) -> Result<f64> {
    let t = s.trim();
    if t.is_empty() || t.len() > 64 {
        return Err(Error::Parse(format!("not a real: {s:?}")));
    }
    t.parse::<f64>()
        .map_err(|_| Error::Parse(format!("not a real: {s:?}")))
}

pub fn serialize<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format(*x))
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    let s = String::deserialize(d)?;
    parse(&s).map_err(D::Error::custom)
}

pub mod vec {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for x in v {
            seq.serialize_element(&format(*x))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
        let raw = Vec::<String>::deserialize(d)?;
        raw.iter()
            .map(|s| parse(s).map_err(D::Error::custom))
            .collect()
    }
}

pub mod pairs {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(v: &[(f64, f64)], s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for (a, b) in v {
            seq.serialize_element(&[format(*a), format(*b)])?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<(f64, f64)>, D::Error> {
        let raw = Vec::<[String; 2]>::deserialize(d)?;
        raw.iter()
            .map(|[a, b]| {
                Ok((
                    parse(a).map_err(D::Error::custom)?,
                    parse(b).map_err(D::Error::custom)?,
                ))
            })
            .collect()
    }
}

/// Complex vectors as `[[re, im], ...]`.
pub mod cvec {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for z in v {
            seq.serialize_element(&[format(z.re), format(z.im)])?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<Complex64>, D::Error> {
        let raw = Vec::<[String; 2]>::deserialize(d)?;
        raw.iter()
            .map(|[a, b]| {
                Ok(Complex64::new(
                    parse(a).map_err(D::Error::custom)?,
                    parse(b).map_err(D::Error::custom)?,
                ))
            })
            .collect()
    }
}

/// A single complex number as `[re, im]`.
pub mod complex {
    use super::*;

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
        serde::Serialize::serialize(&[format(z.re), format(z.im)], s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Complex64, D::Error> {
        let [a, b] = <[String; 2]>::deserialize(d)?;
        Ok(Complex64::new(
            parse(&a).map_err(D::Error::custom)?,
            parse(&b).map_err(D::Error::custom)?,
        ))
    }
}

/// An `f64` that (de)serializes as a real17 string, for maps and other containers.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Real(pub f64);

impl serde::Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        serialize(&self.0, s)
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        deserialize(d).map(Real)
    }
}
