//! Long-format `time, quantity, value` tables from run artifacts.
//!
//! Trajectory CSVs give one row per sample and column (`phi`, `c_k`, `l2`,
//! `xhalf`); Lyapunov reports give `energy`; attractor reports give
//! `semidistance` with the pullback depth in the first column.

use std::io::Write;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use kp_core::evolution::fmt_float;
use serde_json::Value;

pub const HEADER: [&str; 3] = ["time", "quantity", "value"];

pub fn emit(input: &Path, sink: impl Write) -> Result<usize> {
    let text = std::fs::read_to_string(input).with_context(|| format!("cannot read artifact {}", input.display()))?;
    let rows = if input.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        from_report(&serde_json::from_str(&text).with_context(|| format!("unreadable report {}", input.display()))?)?
    } else {
        from_trajectory(&text).with_context(|| format!("unreadable trajectory {}", input.display()))?
    };
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(sink);
    w.write_record(HEADER)?;
    for (t, q, v) in &rows {
        w.write_record([fmt_float(*t).as_str(), q.as_str(), fmt_float(*v).as_str()])?;
    }
    w.flush()?;
    Ok(rows.len())
}

fn from_trajectory(text: &str) -> Result<Vec<(f64, String, f64)>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers()?.clone();
    if header.get(0) != Some("time") {
        bail!("first column must be `time`");
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let t: f64 = record[0].parse()?;
        for (name, field) in header.iter().zip(record.iter()).skip(1) {
            if field.is_empty() {
                continue;
            }
            rows.push((t, name.to_string(), field.parse().map_err(|e| anyhow!("column {name}: {e}"))?));
        }
    }
    Ok(rows)
}

fn numbers(v: &Value) -> Result<Vec<f64>> {
    v.as_array()
        .ok_or_else(|| anyhow!("expected an array"))?
        .iter()
        .map(|x| x.as_f64().ok_or_else(|| anyhow!("expected numbers")))
        .collect()
}

fn from_report(v: &Value) -> Result<Vec<(f64, String, f64)>> {
    if let (Some(times), Some(energies)) = (v.get("times"), v.get("energies")) {
        let (times, energies) = (numbers(times)?, numbers(energies)?);
        return Ok(times.into_iter().zip(energies).map(|(t, e)| (t, "energy".to_string(), e)).collect());
    }
    if let (Some(depths), Some(dist)) = (v.get("depths"), v.get("semidistances")) {
        // Semidistance k compares depth k+1 with depth k.
        let (depths, dist) = (numbers(depths)?, numbers(dist)?);
        return Ok(depths.into_iter().skip(1).zip(dist).map(|(d, s)| (d, "semidistance".to_string(), s)).collect());
    }
    bail!("report has neither times/energies nor depths/semidistances")
}
