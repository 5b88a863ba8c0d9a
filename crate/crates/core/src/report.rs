//! Float formatting and CSV rows for reports.

use std::io::Write;

use serde::Serialize;

use crate::bounds::BoundReport;
use crate::error::{Error, Result};
use crate::sausage::SausageRun;

/// `%.12g`: 12 significant digits, trailing zeros removed, exponent form
/// outside `[1e-4, 1e12)`.
pub fn fmt_g(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.11e}", x);
    let (mant, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if !(-4..12).contains(&exp) {
        let mant = trim_zeros(mant);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{mant}e{sign}{:02}", exp.abs());
    }
    trim_zeros(&format!("{:.*}", (11 - exp) as usize, x)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::InvalidInput(format!("csv output failed: {e}"))
}

fn write_rows<W: Write, R: Serialize>(out: W, rows: &[R]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::InvalidInput(format!("csv output failed: {e}")))?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct BoundRow<'a> {
    shape: &'a str,
    bound: &'a str,
    value: String,
    reference: String,
    stderr: String,
    slack: String,
    method: &'a str,
    seed: String,
}

/// One row per shape and bound.
pub fn write_bounds_csv<W: Write>(out: W, reports: &[BoundReport], seed: Option<u64>) -> Result<()> {
    let seed = seed.map_or(String::new(), |s| s.to_string());
    let mut rows = Vec::new();
    for r in reports {
        for (name, b) in &r.bounds {
            rows.push(BoundRow {
                shape: &r.shape,
                bound: name,
                value: fmt_g(b.value),
                reference: fmt_g(r.reference.value),
                stderr: fmt_g(r.reference.stderr.hypot(b.stderr)),
                slack: r.slack[name].map_or(String::new(), fmt_g),
                method: r.reference.method.name(),
                seed: seed.clone(),
            });
        }
    }
    if rows.is_empty() {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["shape", "bound", "value", "reference", "stderr", "slack", "method", "seed"]).map_err(csv_err)?;
        return w.flush().map_err(|e| Error::InvalidInput(e.to_string()));
    }
    write_rows(out, &rows)
}

#[derive(Debug, Serialize)]
struct PathRow {
    path_id: usize,
    t: String,
    volume: String,
    stderr: String,
    method: &'static str,
    seed: u64,
}

/// Per-path, per-time sausage volumes.
pub fn write_sausage_paths_csv<W: Write>(out: W, run: &SausageRun) -> Result<()> {
    let mut rows = Vec::new();
    for (p, (vols, errs)) in run.volumes.iter().zip(&run.stderr).enumerate() {
        for (j, t) in run.t_grid.iter().enumerate() {
            rows.push(PathRow { path_id: p, t: fmt_g(*t), volume: fmt_g(vols[j]), stderr: fmt_g(errs[j]), method: "sausage_mc", seed: run.seed });
        }
    }
    write_rows(out, &rows)
}

#[derive(Debug, Serialize)]
struct MeanRow {
    t: String,
    mean_volume: String,
    stderr: String,
    method: &'static str,
    seed: u64,
}

/// Across-path mean volume per time.
pub fn write_sausage_means_csv<W: Write>(out: W, run: &SausageRun) -> Result<()> {
    let rows: Vec<MeanRow> = run
        .t_grid
        .iter()
        .zip(run.mean_volumes())
        .map(|(t, e)| MeanRow { t: fmt_g(*t), mean_volume: fmt_g(e.value), stderr: fmt_g(e.stderr), method: "sausage_mc", seed: run.seed })
        .collect();
    write_rows(out, &rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digits() {
        assert_eq!(fmt_g(std::f64::consts::PI), "3.14159265359");
        assert_eq!(fmt_g(4.0 * std::f64::consts::PI), "12.5663706144");
        assert_eq!(fmt_g(1.0), "1");
        assert_eq!(fmt_g(0.5), "0.5");
        assert_eq!(fmt_g(1.5e-7), "1.5e-07");
        assert_eq!(fmt_g(-2.0e15), "-2e+15");
        assert_eq!(fmt_g(123456789012.0), "123456789012");
        assert_eq!(fmt_g(0.0001), "0.0001");
        assert_eq!(fmt_g(9.9999999999999e-5), "0.0001");
    }
}
