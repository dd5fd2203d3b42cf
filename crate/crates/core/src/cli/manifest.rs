//! Run manifest and numeric emission (CSV at configurable precision, JSON at 17 digits).

use std::collections::BTreeMap;
use std::io;
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Digits emitted for floats in JSON.
pub const JSON_DIGITS: usize = 17;

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    /// SHA-256 of the raw config bytes.
    pub config_hash: String,
    pub versions: BTreeMap<String, String>,
    pub seed: u64,
    pub threads: usize,
    /// `(stage, seconds)` in execution order.
    pub stage_seconds: Vec<(String, f64)>,
    pub warnings: Vec<String>,
    pub exit_code: i32,
    pub error: Option<String>,
    pub artifacts: Vec<String>,
}

impl RunManifest {
    pub fn new(subcommand: &str, config_bytes: &[u8], seed: u64) -> Self {
        let mut versions = BTreeMap::new();
        versions.insert("phomog".into(), env!("CARGO_PKG_VERSION").into());
        for m in ["coeffs", "ineq", "oned", "cell", "defect", "homog", "cli"] {
            versions.insert(m.into(), env!("CARGO_PKG_VERSION").into());
        }
        Self {
            subcommand: subcommand.into(),
            config_hash: config_hash(config_bytes),
            versions,
            seed,
            threads: rayon::current_num_threads(),
            stage_seconds: Vec::new(),
            warnings: Vec::new(),
            exit_code: 0,
            error: None,
            artifacts: Vec::new(),
        }
    }

    /// Runs `f` and records its wall time under `stage`.
    pub fn stage<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let out = f();
        self.stage_seconds.push((stage.into(), t.elapsed().as_secs_f64()));
        out
    }

    pub fn warn(&mut self, w: impl IntoIterator<Item = String>) {
        for s in w {
            if !self.warnings.contains(&s) {
                self.warnings.push(s);
            }
        }
    }
}

pub fn config_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Formats `x` with `digits` significant digits in scientific notation.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{:.*e}", digits.saturating_sub(1), x)
}

/// Column table rendered as CSV.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Debug, Clone)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self, digits: usize) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r
                .iter()
                .map(|c| match c {
                    Cell::Num(x) => format_sig(*x, digits),
                    Cell::Int(i) => i.to_string(),
                    Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
                    Cell::Text(s) => s.clone(),
                })
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// JSON formatter writing every float with [`JSON_DIGITS`] significant digits.
struct SigFormatter;

impl serde_json::ser::Formatter for SigFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            w.write_all(format_sig(value, JSON_DIGITS).as_bytes())
        } else {
            w.write_all(b"null")
        }
    }
}

/// Serializes `value` with fixed 17-digit floats.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigFormatter);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("utf8 json"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(format_sig(0.15580286816144537, 6), "1.55803e-1");
        assert_eq!(format_sig(-2.0, 3), "-2.00e0");
        assert_eq!(format_sig(0.1, 17), "1.0000000000000001e-1");
    }

    #[test]
    fn json_floats_round_trip() {
        let v = vec![0.1, 1.0 / 3.0, -1e-300];
        let s = to_json(&v).unwrap();
        let back: Vec<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
        assert!(s.contains("3.3333333333333331e-1"));
    }

    #[test]
    fn hash_tracks_content() {
        assert_eq!(config_hash(b"p = 3"), config_hash(b"p = 3"));
        assert_ne!(config_hash(b"p = 3"), config_hash(b"p = 3 "));
    }

    #[test]
    fn csv_rendering() {
        let mut t = Table::new(&["a", "b", "c"]);
        t.push(vec![Cell::Num(1.5), Cell::Int(3), Cell::Text("x,y".into())]);
        assert_eq!(t.to_csv(2), "a,b,c\n1.5e0,3,\"x,y\"\n");
    }
}
