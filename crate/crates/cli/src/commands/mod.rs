//! Subcommand implementations. Each is a thin adapter: parse arguments,
//! call into the library, serialize the result.

pub mod convert;
pub mod loss;
pub mod measure;
pub mod qa;
pub mod simulate;
pub mod stats;

use crate::Format;
use cine3d::{Error, Result};
use serde_json::Value;
use std::path::Path;

/// "a,b,c" -> three integers, for grid dimensions.
pub fn parse_usize3(s: &str) -> std::result::Result<[usize; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!(
            "expected three comma-separated values, got {}",
            parts.len()
        ));
    }
    let mut out = [0usize; 3];
    for (o, p) in out.iter_mut().zip(&parts) {
        *o = p.parse().map_err(|e| format!("{p:?}: {e}"))?;
    }
    Ok(out)
}

/// "a,b,c" -> three finite floats, for spacings and angles.
pub fn parse_f64_3(s: &str) -> std::result::Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!(
            "expected three comma-separated values, got {}",
            parts.len()
        ));
    }
    let mut out = [0f64; 3];
    for (o, p) in out.iter_mut().zip(&parts) {
        *o = p.parse().map_err(|e| format!("{p:?}: {e}"))?;
        if !o.is_finite() {
            return Err(format!("{p:?} is not finite"));
        }
    }
    Ok(out)
}

/// JSON number, or null when the value has no finite representation
/// (infinite PSNR, for instance).
pub fn json_f64(x: f64) -> Value {
    serde_json::Number::from_f64(x)
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

pub fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        other => Error::InvalidArgument(format!("csv {}: {other:?}", path.display())),
    }
}

pub fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source: e,
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// One flat report. JSON prints an object, CSV a header line plus one
/// record; null cells come out empty in CSV.
pub fn emit_report(format: Format, fields: &[(&str, Value)]) -> Result<()> {
    match format {
        Format::Json => {
            let mut map = serde_json::Map::new();
            for (k, v) in fields {
                map.insert((*k).to_string(), v.clone());
            }
            println!(
                "{}",
                serde_json::to_string_pretty(&Value::Object(map)).expect("report serializes")
            );
        }
        Format::Csv => {
            print!(
                "{}",
                csv_table(
                    &fields
                        .iter()
                        .map(|(k, _)| (*k).to_string())
                        .collect::<Vec<_>>(),
                    std::iter::once(fields.iter().map(|(_, v)| csv_cell(v)).collect()),
                )?
            );
        }
    }
    Ok(())
}

/// Render a header and rows as CSV text.
pub fn csv_table(header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| Error::InvalidArgument(format!("csv: {e}"));
    w.write_record(header).map_err(fail)?;
    for row in rows {
        w.write_record(&row).map_err(fail)?;
    }
    let bytes = w.into_inner().map_err(|e| fail(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv writer emits utf-8"))
}
