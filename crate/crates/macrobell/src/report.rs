//! Machine-readable reports: a JSON object with `config`, `results`, and
//! `references` keys, plus CSV writers with fixed column layouts.
//!
//! Reports embed the master seed, the artifact version, and an FNV-1a hash
//! of the resolved configuration so a result file can always be traced back
//! to the exact run that produced it.

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};

/// Artifact version embedded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// FNV-1a over the canonical JSON encoding of the resolved configuration.
/// Stable across platforms and runs, unlike the std hasher's default keys
/// would be across Rust releases.
pub fn config_hash(resolved: &Value) -> String {
    let canonical = serde_json::to_string(resolved).unwrap_or_default();
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in canonical.as_bytes() {
        hash ^= *byte as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{hash:016x}")
}

/// Assemble the standard report object.
pub fn build_report(
    command: &str,
    seed: u64,
    params: Value,
    results: Value,
    references: Value,
) -> Value {
    let mut config = json!({
        "command": command,
        "seed": seed,
        "version": VERSION,
        "params": params,
    });
    let hash = config_hash(&config);
    config["hash"] = Value::String(hash);
    json!({
        "config": config,
        "results": results,
        "references": references,
    })
}

pub fn to_json_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize infallibly")
}

/// Render a report as pretty JSON with a trailing newline.
pub fn render_json(report: &Value) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("JSON rendering cannot fail");
    s.push('\n');
    s
}

/// CSV writer with the crate's fixed conventions: comma delimiter, `.`
/// decimal point, one header row, `\n` line endings.
pub struct CsvBuilder {
    out: String,
}

impl CsvBuilder {
    pub fn new(header: &[&str]) -> Self {
        let mut out = String::new();
        out.push_str(&header.join(","));
        out.push('\n');
        CsvBuilder { out }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.out.push_str(&fields.join(","));
        self.out.push('\n');
    }

    pub fn finish(self) -> String {
        self.out
    }
}

/// Format a float for CSV with full round-trip precision.
pub fn fmt_f64(v: f64) -> String {
    let mut s = format!("{v}");
    if !s.contains('.') && !s.contains('e') && !s.contains("inf") && !s.contains("NaN") {
        s.push_str(".0");
    }
    s
}

/// Write string content to a path, or to stdout when the path is `-`.
pub fn write_artifact(path: &str, content: &str) -> Result<()> {
    if path == "-" {
        print!("{content}");
        return Ok(());
    }
    std::fs::write(path, content)
        .map_err(|e| Error::invalid(format!("cannot write artifact '{path}': {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_shape_and_hash_stability() {
        let r1 = build_report("bell", 7, json!({"n": 100}), json!({"b_hat": 2.8}), json!({}));
        let r2 = build_report("bell", 7, json!({"n": 100}), json!({"b_hat": 2.9}), json!({}));
        assert_eq!(r1["config"]["hash"], r2["config"]["hash"]);
        assert_eq!(r1["config"]["seed"], 7);
        assert_eq!(r1["config"]["version"], VERSION);
        let keys: Vec<&String> = r1.as_object().unwrap().keys().collect();
        assert_eq!(keys, ["config", "references", "results"]);

        let r3 = build_report("bell", 8, json!({"n": 100}), json!({}), json!({}));
        assert_ne!(r1["config"]["hash"], r3["config"]["hash"]);
    }

    #[test]
    fn csv_layout() {
        let mut csv = CsvBuilder::new(&["a", "b"]);
        csv.row(&[fmt_f64(1.0), fmt_f64(0.25)]);
        csv.row(&[fmt_f64(-3.5e-7), "x".to_string()]);
        assert_eq!(csv.finish(), "a,b\n1.0,0.25\n-3.5e-7,x\n");
    }
}
