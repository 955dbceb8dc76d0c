//! CSV tables of function values at grid midpoints.
//!
//! A header row is required: `x,value` for 1-D grids (the coordinate column
//! may also be named `y` for a y-axis table) and `x,y,value` for 2-D grids,
//! with rows in x-fastest order.

use std::path::Path;

use iproj::GridSpec;

use crate::{CliError, Result};

/// Coordinates may differ from the midpoints by this fraction of a cell.
const COORD_TOL: f64 = 1e-6;

pub fn read_table(path: &Path, grid: &GridSpec) -> Result<Vec<f64>> {
    let fail = |message: String| CliError::Table {
        path: path.to_path_buf(),
        message,
    };
    let file = std::fs::File::open(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let headers = reader.headers().map_err(|e| fail(e.to_string()))?.clone();
    let names: Vec<&str> = headers.iter().collect();
    let header_ok = match grid.dim() {
        1 => matches!(names.as_slice(), ["x" | "y", "value"]),
        _ => names == ["x", "y", "value"],
    };
    if !header_ok {
        let expected = if grid.dim() == 1 { "x,value" } else { "x,y,value" };
        return Err(fail(format!(
            "header must be `{expected}`, found `{}`",
            names.join(",")
        )));
    }

    let widths: Vec<f64> = grid.axes().iter().map(|a| a.width()).collect();
    let mut values = Vec::with_capacity(grid.len());
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| fail(e.to_string()))?;
        let line = row + 2;
        if values.len() == grid.len() {
            return Err(fail(format!("expected {} data rows, found more", grid.len())));
        }
        let fields: Vec<f64> = record
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| fail(format!("line {line}: `{f}` is not a number")))
            })
            .collect::<Result<_>>()?;
        let k = values.len();
        let point = grid.point(k);
        for (d, w) in widths.iter().enumerate() {
            if (fields[d] - point[d]).abs() > COORD_TOL * w {
                return Err(fail(format!(
                    "line {line}: coordinate {} does not match grid node {}",
                    fields[d], point[d]
                )));
            }
        }
        let v = fields[grid.dim()];
        if v.is_nan() {
            return Err(fail(format!("line {line}: value is NaN")));
        }
        values.push(v);
    }
    if values.len() != grid.len() {
        return Err(fail(format!(
            "expected {} data rows, found {}",
            grid.len(),
            values.len()
        )));
    }
    Ok(values)
}
