//! Deterministic artifact formatting: round-trip-safe floats, CSV tables,
//! single-line key-value summaries, and the config hash embedded in every
//! artifact so repeated runs can be compared byte for byte.

use std::fmt::Write as _;

/// Version string stamped into artifacts.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Format with 17 significant digits; round-trips through f64 parsing.
pub fn format_f64(x: f64) -> String {
    if x == 0.0 {
        // Normalize -0.0 so artifacts do not depend on sign-of-zero noise.
        return "0.0000000000000000e0".to_string();
    }
    format!("{x:.16e}")
}

/// FNV-1a 64-bit hash of the canonical config text.
pub fn config_hash(canonical: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in canonical.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// A CSV table with a fixed header, float cells rendered via `format_f64`.
pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(columns: &[&str]) -> Self {
        CsvTable {
            header: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, cells: &[CsvCell]) {
        assert_eq!(cells.len(), self.header.len(), "row arity mismatch");
        self.rows
            .push(cells.iter().map(|c| c.render()).collect::<Vec<_>>());
    }

    /// Render with leading comment lines carrying provenance.
    pub fn render(&self, config_hash: u64) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# tool_version={TOOL_VERSION}");
        let _ = writeln!(out, "# config_hash={config_hash:016x}");
        let _ = writeln!(out, "{}", self.header.join(","));
        for row in &self.rows {
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }
}

pub enum CsvCell {
    F(f64),
    I(i64),
    S(String),
}

impl CsvCell {
    fn render(&self) -> String {
        match self {
            CsvCell::F(x) => format_f64(*x),
            CsvCell::I(i) => i.to_string(),
            CsvCell::S(s) => s.clone(),
        }
    }
}

/// Single-line key=value summary record, keys emitted in insertion order.
#[derive(Default)]
pub struct Summary {
    entries: Vec<(String, String)>,
}

impl Summary {
    pub fn new() -> Self {
        Summary::default()
    }

    pub fn push_f64(&mut self, key: &str, value: f64) {
        self.entries.push((key.to_string(), format_f64(value)));
    }

    pub fn push_int(&mut self, key: &str, value: i64) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn push_str(&mut self, key: &str, value: &str) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn render(&self, config_hash: u64) -> String {
        let mut parts = vec![
            format!("tool_version={TOOL_VERSION}"),
            format!("config_hash={config_hash:016x}"),
        ];
        parts.extend(self.entries.iter().map(|(k, v)| format!("{k}={v}")));
        let mut line = parts.join(" ");
        line.push('\n');
        line
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [
            0.0,
            -0.0,
            1.0 / 3.0,
            3f64.sqrt() / 3.0,
            -2.375e-5,
            123456.75,
            f64::MIN_POSITIVE,
        ] {
            let s = format_f64(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back, if x == 0.0 { 0.0 } else { x }, "{s}");
        }
    }

    #[test]
    fn hash_is_stable() {
        assert_eq!(config_hash(""), 0xcbf29ce484222325);
        assert_eq!(config_hash("a"), config_hash("a"));
        assert_ne!(config_hash("a"), config_hash("b"));
    }
}
