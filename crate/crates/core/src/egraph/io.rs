use serde::Serialize;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use super::PointCloud;
use crate::error::{domain, Error, Result};
use crate::harness::fmt_real;

/// Reads one point per CSV row. A first row that does not parse as numbers
/// is taken as a header and its fields become column names; every later
/// row must be numeric, finite and as wide as the first data row. Rows and
/// columns in errors are 1-based file positions.
pub fn read_point_cloud(path: &Path) -> Result<PointCloud> {
    let file = File::open(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut points: Vec<Vec<f64>> = Vec::new();
    let mut width: Option<usize> = None;
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        let row = record.position().map_or(idx as u64 + 1, |p| p.line()) as usize;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let parsed: Vec<std::result::Result<f64, _>> =
            record.iter().map(str::parse::<f64>).collect();
        if idx == 0 && parsed.iter().any(|r| r.is_err()) {
            width = Some(record.len());
            continue;
        }
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(Error::Parse {
                row,
                column: record.len().min(expected) + 1,
                message: format!("expected {expected} fields, found {}", record.len()),
            });
        }
        let mut point = Vec::with_capacity(expected);
        for (col, (value, field)) in parsed.into_iter().zip(record.iter()).enumerate() {
            match value {
                Ok(x) if x.is_finite() => point.push(x),
                _ => {
                    return Err(Error::Parse {
                        row,
                        column: col + 1,
                        message: format!("`{field}` is not a finite number"),
                    })
                }
            }
        }
        points.push(point);
    }
    match width {
        Some(dim) => PointCloud::with_dim(points, dim),
        None => Err(domain(format!("{} holds no points", path.display()))),
    }
}

/// One edge of an output graph.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EdgeListRow {
    pub i: usize,
    pub j: usize,
    /// Estimated distance; `None` for classical builders.
    pub distance_estimate: Option<f64>,
}

pub fn write_edge_list<W: Write>(out: W, rows: &[EdgeListRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["i", "j", "distance_estimate"])?;
    for r in rows {
        w.write_record([
            r.i.to_string(),
            r.j.to_string(),
            r.distance_estimate.map(fmt_real).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Outcome of one ε-graph trial, written next to the edge list.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GraphSummary {
    pub n: usize,
    pub eps: f64,
    pub mode: String,
    pub shots: String,
    pub seed: u64,
    pub fn_count: usize,
    pub fp_count: usize,
}
