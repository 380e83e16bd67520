//! JSON reports. Everything except `timings` is reproducible byte for byte.

use netplace::NodeSet;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const FORMAT: &str = "netplace-report/1";

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub format: &'static str,
    pub command: &'static str,
    pub input: InputEcho,
    pub result: Value,
    pub timings: Timings,
}

#[derive(Clone, Debug, Serialize)]
pub struct InputEcho {
    pub system_sha256: String,
    pub config: Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct Timings {
    pub elapsed_ms: f64,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("reports always serialize");
        out.push('\n');
        out
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Twelve significant digits in scientific notation.
pub fn format_value(v: f64) -> String {
    format!("{v:.11e}")
}

/// Sorted 1-based node ids.
pub fn ids(s: &NodeSet) -> Vec<usize> {
    s.iter().map(|v| v + 1).collect()
}
