//! Reading and writing vectors and matrices.
//!
//! Two formats: CSV (one row per line, comma-separated decimals) and JSON
//! (`{"dim": d, "data": [...]}`, row-major). All floats are written with 17
//! significant digits so that output is reproducible bit-for-bit and
//! round-trips exactly.

use nalgebra::{DMatrix, DVector};
use serde::Deserialize;
use std::path::Path;

use crate::error::{Error, Result};

/// Formats a float with 17 significant digits (1 before the decimal point,
/// 16 after, exponent notation).
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Deserialize)]
struct JsonArray {
    dim: usize,
    data: Vec<f64>,
    #[serde(default)]
    #[allow(dead_code)]
    metzler: bool,
}

fn parse_csv_rows(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|cell| {
                cell.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))
            })
            .collect::<Result<_>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse("empty input".into()));
    }
    let width = rows[0].len();
    if rows.iter().any(|r| r.len() != width) {
        return Err(Error::Parse("ragged rows: lines have different lengths".into()));
    }
    Ok(rows)
}

pub fn matrix_from_csv(text: &str) -> Result<DMatrix<f64>> {
    let rows = parse_csv_rows(text)?;
    let (nr, nc) = (rows.len(), rows[0].len());
    Ok(DMatrix::from_row_iterator(
        nr,
        nc,
        rows.into_iter().flatten(),
    ))
}

pub fn vector_from_csv(text: &str) -> Result<DVector<f64>> {
    let rows = parse_csv_rows(text)?;
    if rows.len() == 1 {
        Ok(DVector::from_vec(rows.into_iter().next().unwrap()))
    } else if rows[0].len() == 1 {
        Ok(DVector::from_iterator(
            rows.len(),
            rows.into_iter().map(|r| r[0]),
        ))
    } else {
        Err(Error::Parse(
            "expected a single row or a single column for a vector".into(),
        ))
    }
}

pub fn matrix_from_json(text: &str) -> Result<DMatrix<f64>> {
    let arr: JsonArray =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if arr.data.len() != arr.dim * arr.dim {
        return Err(Error::Parse(format!(
            "expected dim*dim = {} entries, got {}",
            arr.dim * arr.dim,
            arr.data.len()
        )));
    }
    Ok(DMatrix::from_row_iterator(arr.dim, arr.dim, arr.data))
}

pub fn vector_from_json(text: &str) -> Result<DVector<f64>> {
    let arr: JsonArray =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if arr.data.len() != arr.dim {
        return Err(Error::Parse(format!(
            "expected dim = {} entries, got {}",
            arr.dim,
            arr.data.len()
        )));
    }
    Ok(DVector::from_vec(arr.data))
}

/// Reads a matrix, picking the format from the file extension
/// (`.json` means JSON, anything else CSV).
pub fn read_matrix(path: &Path) -> Result<DMatrix<f64>> {
    let text = std::fs::read_to_string(path)?;
    if is_json(path) {
        matrix_from_json(&text)
    } else {
        matrix_from_csv(&text)
    }
}

pub fn read_vector(path: &Path) -> Result<DVector<f64>> {
    let text = std::fs::read_to_string(path)?;
    if is_json(path) {
        vector_from_json(&text)
    } else {
        vector_from_csv(&text)
    }
}

fn is_json(path: &Path) -> bool {
    path.extension().map(|e| e == "json").unwrap_or(false)
}

pub fn matrix_to_csv(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format_f64(m[(i, j)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn vector_to_csv(v: &DVector<f64>) -> String {
    let row: Vec<String> = v.iter().map(|&x| format_f64(x)).collect();
    format!("{}\n", row.join(","))
}

pub fn matrix_to_json(m: &DMatrix<f64>) -> String {
    let cells: Vec<String> = (0..m.nrows())
        .flat_map(|i| (0..m.ncols()).map(move |j| (i, j)))
        .map(|(i, j)| format_f64(m[(i, j)]))
        .collect();
    format!("{{\"dim\": {}, \"data\": [{}]}}\n", m.nrows(), cells.join(", "))
}

pub fn vector_to_json(v: &DVector<f64>) -> String {
    let cells: Vec<String> = v.iter().map(|&x| format_f64(x)).collect();
    format!("{{\"dim\": {}, \"data\": [{}]}}\n", v.len(), cells.join(", "))
}
