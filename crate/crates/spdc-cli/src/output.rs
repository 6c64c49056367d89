//! Deterministic output encoding.
//!
//! JSON is compact, keeps struct field order, and prints every float in
//! scientific notation with 12 significant digits, so the same inputs
//! produce byte-identical files on any platform. CSV uses the same
//! float encoding.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;

use crate::CliError;

/// Fixed-width float encoding used in JSON and CSV: 12 significant
/// digits, exponent form, sign only when negative.
pub fn fmt_f64(value: f64) -> String {
    format!("{value:.11e}")
}

struct CanonicalFormatter;

impl serde_json::ser::Formatter for CanonicalFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.11e}")
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{:.11e}", value as f64)
    }
}

/// Serializes to one line of canonical JSON plus a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, CanonicalFormatter);
    value
        .serialize(&mut ser)
        .map_err(|e| CliError::Numerical(format!("cannot encode output: {e}")))?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| CliError::Numerical(format!("non-utf8 output: {e}")))
}

/// Writes to the chosen file, or stdout when no path was given.
pub fn emit(out: Option<&Path>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, content).map_err(|e| {
            CliError::Validation(format!("cannot write {}: {e}", path.display()))
        }),
        None => io::stdout()
            .write_all(content.as_bytes())
            .map_err(|e| CliError::Validation(format!("cannot write stdout: {e}"))),
    }
}

/// Renders rows as an aligned text table with a header line.
pub fn render_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let mut out = String::new();
    let mut push_row = |cells: &[String]| {
        let line: Vec<String> = cells
            .iter()
            .enumerate()
            .map(|(i, c)| format!("{c:<width$}", width = widths[i]))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    };
    push_row(&header.iter().map(|s| s.to_string()).collect::<Vec<_>>());
    for row in rows {
        push_row(row);
    }
    out
}

/// Flattens any JSON-representable value into dotted-path/value CSV
/// rows; used for outputs that are records rather than tables.
pub fn to_key_value_csv<T: Serialize>(value: &T) -> Result<String, CliError> {
    let tree = serde_json::to_value(value)
        .map_err(|e| CliError::Numerical(format!("cannot encode output: {e}")))?;
    let mut rows = Vec::new();
    flatten("", &tree, &mut rows);
    let mut out = String::from("field,value\n");
    for (path, cell) in rows {
        out.push_str(&format!("{path},{cell}\n"));
    }
    Ok(out)
}

fn flatten(prefix: &str, value: &serde_json::Value, rows: &mut Vec<(String, String)>) {
    use serde_json::Value;
    let join = |key: &str| {
        if prefix.is_empty() {
            key.to_string()
        } else {
            format!("{prefix}.{key}")
        }
    };
    match value {
        Value::Object(map) => {
            for (key, child) in map {
                flatten(&join(key), child, rows);
            }
        }
        Value::Array(items) => {
            for (i, child) in items.iter().enumerate() {
                flatten(&join(&i.to_string()), child, rows);
            }
        }
        Value::Null => rows.push((prefix.to_string(), String::new())),
        Value::Bool(b) => rows.push((prefix.to_string(), b.to_string())),
        Value::Number(n) => {
            let cell = if let Some(u) = n.as_u64() {
                u.to_string()
            } else if let Some(i) = n.as_i64() {
                i.to_string()
            } else {
                fmt_f64(n.as_f64().unwrap_or(f64::NAN))
            };
            rows.push((prefix.to_string(), cell));
        }
        Value::String(s) => rows.push((prefix.to_string(), csv_quote(s))),
    }
}

/// Quotes a CSV cell only when it needs it.
pub fn csv_quote(cell: &str) -> String {
    if cell.contains([',', '"', '\n']) {
        format!("\"{}\"", cell.replace('"', "\"\""))
    } else {
        cell.to_string()
    }
}
