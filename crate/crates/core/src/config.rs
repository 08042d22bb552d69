//! Flat `key = value` configuration files and named irrational presets.
//!
//! ```text
//! # golden instance
//! d = 1
//! A.base = 0
//! A.directions = 1
//! B.base = golden
//! psi.kind = power
//! psi.c = 1
//! psi.alpha = 1
//! ```
//!
//! Vectors are comma separated; direction lists are separated by `;`.
//! Scalars are rational literals `p`, `p/q` or `p/2^k`, or a preset name.
//! Floating-point literals are rejected.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use num_bigint::BigInt;
use num_traits::One;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::exactnum::{fmt_rat, parse_rat, Rat};
use crate::geometry::RatVec;

/// Fractional bits of every preset stand-in: `floor(v · 2^200) / 2^200`.
pub const PRESET_BITS: u32 = 200;

fn dyadic_floor_root(k: u32, num: u32) -> Rat {
    // floor((num)^(1/k) · 2^B) = floor((num · 2^(kB))^(1/k))
    let scaled = BigInt::from(num) << (k * PRESET_BITS);
    Rat::new(scaled.nth_root(k), BigInt::one() << PRESET_BITS)
}

/// Named stand-ins. `golden` is `(√5 − 1)/2`, the fractional part of the golden ratio.
pub fn preset(name: &str) -> Option<RatVec> {
    let b = PRESET_BITS;
    Some(match name {
        "golden" => {
            // (√5 − 1)/2 · 2^B = √(5 · 2^(2B−2)) − 2^(B−1)
            let s = (BigInt::from(5) << (2 * b - 2)).sqrt();
            vec![Rat::new(s - (BigInt::one() << (b - 1)), BigInt::one() << b)]
        }
        "sqrt2" => vec![dyadic_floor_root(2, 2)],
        "cbrt2" => vec![dyadic_floor_root(3, 2)],
        "cbrt4" => vec![dyadic_floor_root(3, 4)],
        "cubic-pair" => vec![dyadic_floor_root(3, 2), dyadic_floor_root(3, 4)],
        _ => return None,
    })
}

pub const PRESET_NAMES: [&str; 5] = ["golden", "sqrt2", "cbrt2", "cbrt4", "cubic-pair"];

/// Upper bound on `|stand-in − true value|` per coordinate.
pub fn preset_error() -> Rat {
    Rat::new(BigInt::one(), BigInt::one() << PRESET_BITS)
}

/// Scalar literal or scalar preset.
pub fn parse_scalar(s: &str) -> Result<Rat> {
    let s = s.trim();
    if let Some(v) = preset(s) {
        if v.len() == 1 {
            return Ok(v[0].clone());
        }
        return Err(Error::Parse(format!("preset {s:?} is a vector, not a scalar")));
    }
    parse_rat(s)
}

/// Comma separated scalars, or a vector preset. The empty string is the empty vector.
pub fn parse_vector(s: &str) -> Result<RatVec> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    if let Some(v) = preset(s) {
        return Ok(v);
    }
    let mut out = Vec::new();
    for part in s.split(',') {
        let part = part.trim();
        match preset(part) {
            Some(v) => out.extend(v),
            None => out.push(parse_rat(part)?),
        }
    }
    Ok(out)
}

/// `;` separated vectors.
pub fn parse_vectors(s: &str) -> Result<Vec<RatVec>> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(';').map(parse_vector).collect()
}

pub fn fmt_vector(v: &[Rat]) -> String {
    v.iter().map(fmt_rat).collect::<Vec<_>>().join(", ")
}

pub fn fmt_vectors(vs: &[RatVec]) -> String {
    vs.iter().map(|v| fmt_vector(v)).collect::<Vec<_>>().join("; ")
}

/// CSV text with a header row; cells holding commas (intervals) are quoted.
pub fn to_csv<I>(header: &[String], rows: I) -> Result<String>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header).map_err(|e| Error::invalid(e.to_string()))?;
    for r in rows {
        w.write_record(&r).map_err(|e| Error::invalid(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::invalid(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::invalid(e.to_string()))
}

/// Raw key/value pairs, kept sorted.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KeyValues(pub BTreeMap<String, String>);

impl KeyValues {
    /// Parses the flat text format, or a flat JSON object when the text starts with `{`.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            return Self::from_json(text);
        }
        let mut map = BTreeMap::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", ln + 1)))?;
            let k = k.trim().to_string();
            if map.insert(k.clone(), v.trim().to_string()).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key {k:?}", ln + 1)));
            }
        }
        Ok(KeyValues(map))
    }

    fn from_json(text: &str) -> Result<Self> {
        let v: serde_json::Value = serde_json::from_str(text)?;
        // report.json nests the echo under "config"
        let obj = v.get("config").unwrap_or(&v);
        let obj = obj.as_object().ok_or_else(|| Error::Config("expected a JSON object".into()))?;
        let mut map = BTreeMap::new();
        for (k, v) in obj {
            let s = match v {
                serde_json::Value::String(s) => s.clone(),
                serde_json::Value::Number(n) if n.is_u64() || n.is_i64() => n.to_string(),
                other => return Err(Error::Config(format!("key {k:?}: expected a string, got {other}"))),
            };
            map.insert(k.clone(), s);
        }
        Ok(KeyValues(map))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| Error::Config(format!("missing key {key:?}")))
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.0.insert(key.to_string(), value.into());
    }

    /// `key = value` lines in key order.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.0 {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    /// SHA-256 of the canonical form, hex encoded.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Object(self.0.iter().map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone()))).collect())
    }
}
