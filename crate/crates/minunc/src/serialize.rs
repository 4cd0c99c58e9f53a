//! Deterministic artifact writers.
//!
//! Every float is rendered as `{:.16e}` (17 significant digits), which
//! round-trips `f64` exactly, so repeated runs with identical inputs
//! produce byte-identical files. Non-finite values are rejected at write
//! time rather than silently serialized.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use ndarray::Array2;
use serde::Serialize;
use serde_json::ser::Formatter;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::C64;

pub fn fmt_f64(v: f64) -> String {
    format!("{:.16e}", v)
}

fn ensure_finite(label: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Numerical(format!(
            "{label} is not finite ({v}); refusing to write"
        )))
    }
}

/// JSON formatter that renders every f64 with the shared scientific format.
struct SciFloats;

impl Formatter for SciFloats {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        write!(writer, "{:.16e}", value)
    }
}

pub fn complex_value(z: C64) -> Value {
    serde_json::json!({ "re": z.re, "im": z.im })
}

/// Serializes a JSON document with deterministic float text and a trailing
/// newline. `serde_json` maps iterate in key order, so the byte stream is a
/// pure function of the value.
pub fn write_json_value(path: &Path, value: &Value) -> Result<()> {
    for v in finite_leaves(value) {
        ensure_finite("json field", v)?;
    }
    create_parent(path)?;
    let file = File::create(path)?;
    let mut writer = BufWriter::new(file);
    let mut ser = serde_json::Serializer::with_formatter(&mut writer, SciFloats);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Numerical(format!("json serialization failed: {e}")))?;
    writer.write_all(b"\n")?;
    writer.flush()?;
    Ok(())
}

fn finite_leaves(value: &Value) -> Vec<f64> {
    let mut out = Vec::new();
    collect_floats(value, &mut out);
    out
}

fn collect_floats(value: &Value, out: &mut Vec<f64>) {
    match value {
        Value::Number(n) => {
            if let Some(v) = n.as_f64() {
                out.push(v);
            }
        }
        Value::Array(items) => {
            for item in items {
                collect_floats(item, out);
            }
        }
        Value::Object(map) => {
            for item in map.values() {
                collect_floats(item, out);
            }
        }
        _ => {}
    }
}

fn create_parent(path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    Ok(())
}

/// Writes a real-valued grid sampled on the product of two axes.
///
/// CSV layout: header `<x_name>\<y_name>,<y_0>,...`, then one row per x
/// sample. Rows are streamed so the full text never lives in memory.
/// JSON layout: `{x_name, y_name, shape, x, y, values}` with `values`
/// indexed as `values[i][j] = f(x_i, y_j)`.
pub fn write_grid(
    path: &Path,
    format: GridFormat,
    x_name: &str,
    y_name: &str,
    x_axis: &[f64],
    y_axis: &[f64],
    values: &Array2<f64>,
) -> Result<()> {
    if values.shape() != [x_axis.len(), y_axis.len()] {
        return Err(Error::InvalidArgument(format!(
            "grid shape {:?} does not match axes {}x{}",
            values.shape(),
            x_axis.len(),
            y_axis.len()
        )));
    }
    for &v in x_axis {
        ensure_finite(x_name, v)?;
    }
    for &v in y_axis {
        ensure_finite(y_name, v)?;
    }
    for &v in values.iter() {
        ensure_finite("grid value", v)?;
    }
    create_parent(path)?;
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    match format {
        GridFormat::Csv => {
            write!(w, "{}\\{}", x_name, y_name)?;
            for &y in y_axis {
                write!(w, ",{}", fmt_f64(y))?;
            }
            w.write_all(b"\r\n")?;
            for (i, &x) in x_axis.iter().enumerate() {
                write!(w, "{}", fmt_f64(x))?;
                for j in 0..y_axis.len() {
                    write!(w, ",{}", fmt_f64(values[[i, j]]))?;
                }
                w.write_all(b"\r\n")?;
            }
        }
        GridFormat::Json => {
            write!(
                w,
                "{{\"x_name\":{},\"y_name\":{},\"shape\":[{},{}],",
                serde_json::to_string(x_name).expect("plain string"),
                serde_json::to_string(y_name).expect("plain string"),
                x_axis.len(),
                y_axis.len()
            )?;
            write_f64_array(&mut w, "x", x_axis)?;
            w.write_all(b",")?;
            write_f64_array(&mut w, "y", y_axis)?;
            w.write_all(b",\"values\":[")?;
            for i in 0..x_axis.len() {
                if i > 0 {
                    w.write_all(b",")?;
                }
                w.write_all(b"[")?;
                for j in 0..y_axis.len() {
                    if j > 0 {
                        w.write_all(b",")?;
                    }
                    write!(w, "{}", fmt_f64(values[[i, j]]))?;
                }
                w.write_all(b"]")?;
            }
            w.write_all(b"]}\n")?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridFormat {
    Json,
    Csv,
}

fn write_f64_array<W: Write>(w: &mut W, name: &str, data: &[f64]) -> std::io::Result<()> {
    write!(w, "\"{}\":[", name)?;
    for (i, &v) in data.iter().enumerate() {
        if i > 0 {
            w.write_all(b",")?;
        }
        write!(w, "{}", fmt_f64(v))?;
    }
    w.write_all(b"]")
}

/// Writes a CSV table of named real columns, all of equal length.
pub fn write_columns_csv(path: &Path, names: &[&str], columns: &[&[f64]]) -> Result<()> {
    if names.len() != columns.len() {
        return Err(Error::InvalidArgument(
            "column names and data differ in count".into(),
        ));
    }
    let rows = columns.first().map_or(0, |c| c.len());
    for (name, col) in names.iter().zip(columns) {
        if col.len() != rows {
            return Err(Error::InvalidArgument(format!(
                "column {name} has {} rows, expected {rows}",
                col.len()
            )));
        }
        for &v in *col {
            ensure_finite(name, v)?;
        }
    }
    create_parent(path)?;
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    w.write_all(names.join(",").as_bytes())?;
    w.write_all(b"\r\n")?;
    for r in 0..rows {
        for (c, col) in columns.iter().enumerate() {
            if c > 0 {
                w.write_all(b",")?;
            }
            write!(w, "{}", fmt_f64(col[r]))?;
        }
        w.write_all(b"\r\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Writes labelled scalars as CSV rows of `field,re,im`.
pub fn write_fields_csv(path: &Path, rows: &[(&str, C64)]) -> Result<()> {
    for (name, z) in rows {
        ensure_finite(name, z.re)?;
        ensure_finite(name, z.im)?;
    }
    create_parent(path)?;
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    w.write_all(b"field,re,im\r\n")?;
    for (name, z) in rows {
        write!(w, "{},{},{}", name, fmt_f64(z.re), fmt_f64(z.im))?;
        w.write_all(b"\r\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Writes complex amplitudes as CSV rows of `index,re,im`.
pub fn write_amplitudes_csv(path: &Path, amps: &[C64]) -> Result<()> {
    for (i, z) in amps.iter().enumerate() {
        ensure_finite(&format!("amplitude {i}"), z.re)?;
        ensure_finite(&format!("amplitude {i}"), z.im)?;
    }
    create_parent(path)?;
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    w.write_all(b"index,re,im\r\n")?;
    for (i, z) in amps.iter().enumerate() {
        write!(w, "{},{},{}", i, fmt_f64(z.re), fmt_f64(z.im))?;
        w.write_all(b"\r\n")?;
    }
    w.flush()?;
    Ok(())
}
