//! Report emission helpers: exact rationals as "num/den" strings, float
//! companions for readability, CSV assembly and output routing.

use std::fs;
use std::path::Path;

use ghz_core::rat::{rat_to_string, Rational};
use num::ToPrimitive;
use serde_json::Value;

use crate::config::LabError;

/// A rational as its canonical "num/den" JSON string.
pub fn rat_value(r: &Rational) -> Value {
    Value::String(rat_to_string(r))
}

pub fn rat_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Assembles a CSV document from a header and stringly rows.
pub fn csv_document(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Writes `text` to `path`, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, text: &str) -> Result<(), LabError> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => println!("{text}"),
    }
    Ok(())
}

/// Pretty JSON with a trailing newline, byte-identical across reruns of
/// the same config (maps are ordered).
pub fn render_json(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializable report");
    text.push('\n');
    text
}
