//! Shared emission helpers: deterministic CSV with full-precision floats
//! ('.' decimal separator, '\n' line endings) and pretty JSON.

use serde::Serialize;

/// Format a float with 17 significant digits, enough to round-trip f64.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Render a CSV table: header row plus one row per record.
pub fn to_csv(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&v| fmt_float(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Pretty-printed JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}
