//! Empirical convergence rates against NDOF.

use std::io::Read;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Rates {
    /// Slope between consecutive usable rows.
    pub intervals: Vec<f64>,
    /// Least-squares slope of log(value) against log(ndof).
    pub least_squares: f64,
    /// Rows dropped for a nonpositive or missing value.
    pub skipped: usize,
}

/// Slope of the least-squares line through (ln x, ln y).
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Rates of `values` against `ndof`; rows with nonpositive entries are skipped.
pub fn compute_rates(ndof: &[f64], values: &[Option<f64>]) -> Result<Rates> {
    if ndof.len() != values.len() {
        return Err(Error::InvalidParameter("ndof and value columns differ in length".into()));
    }
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut skipped = 0;
    for (i, (&n, v)) in ndof.iter().zip(values).enumerate() {
        match v {
            Some(v) if *v > 0.0 && n > 0.0 => {
                x.push(n);
                y.push(*v);
            }
            _ => {
                log::warn!("row {i}: skipping value {v:?}");
                skipped += 1;
            }
        }
    }
    if x.len() < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 usable rows, got {}", x.len())));
    }
    let intervals = x
        .windows(2)
        .zip(y.windows(2))
        .map(|(a, b)| (b[1] / b[0]).ln() / (a[1] / a[0]).ln())
        .collect();
    Ok(Rates {
        intervals,
        least_squares: log_log_slope(&x, &y),
        skipped,
    })
}

/// Reads the `ndof` column and `column` from a run CSV. Empty cells become `None`.
pub fn read_csv_column<R: Read>(input: R, column: &str) -> Result<(Vec<f64>, Vec<Option<f64>>)> {
    let mut reader = csv::Reader::from_reader(input);
    let headers = reader.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::InvalidParameter(format!("column '{name}' not found")))
    };
    let (ci, vi) = (find("ndof")?, find(column)?);
    let mut ndof = Vec::new();
    let mut values = Vec::new();
    for (row, rec) in reader.records().enumerate() {
        let rec = rec?;
        let parse = |s: &str| -> Result<f64> {
            s.trim().parse().map_err(|_| Error::Parse {
                line: row + 2,
                message: format!("not a number: '{s}'"),
            })
        };
        ndof.push(parse(&rec[ci])?);
        let v = rec[vi].trim();
        values.push(if v.is_empty() { None } else { Some(parse(v)?) });
    }
    Ok((ndof, values))
}
