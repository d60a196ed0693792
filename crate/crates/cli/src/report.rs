//! Report emission: every command produces one JSON document with the
//! command name, the echoed configuration, the verdict, and its payload.
//! Residuals and defects are decimal strings with 17 significant digits;
//! structural data stays numeric.

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use psfm_core::CMatrix;

use crate::config::ConfigEcho;

/// 17 significant digits, the shortest exact decimal form of an f64.
pub fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn complex_pair(z: Complex64) -> Value {
    json!([z.re, z.im])
}

/// Matrix as nested `[re, im]` pairs, row-major.
pub fn matrix_json(m: &CMatrix) -> Value {
    let rows: Vec<Value> = (0..m.nrows())
        .map(|i| Value::Array((0..m.ncols()).map(|j| complex_pair(m[(i, j)])).collect()))
        .collect();
    Value::Array(rows)
}

#[derive(Serialize)]
struct Envelope<'a> {
    command: &'a str,
    config: &'a ConfigEcho,
    passed: bool,
    report: Value,
}

/// Renders the full document; key order is the struct field order above
/// plus alphabetical order inside untyped maps, both deterministic.
pub fn render(command: &str, config: &ConfigEcho, passed: bool, report: Value) -> String {
    let envelope = Envelope {
        command,
        config,
        passed,
        report,
    };
    let mut text = serde_json::to_string_pretty(&envelope).expect("report serialization");
    text.push('\n');
    text
}

/// Writes to the output path or stdout.
pub fn emit(output: Option<&std::path::Path>, text: &str) -> std::io::Result<()> {
    match output {
        Some(path) => std::fs::write(path, text),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(text.as_bytes())
        }
    }
}
