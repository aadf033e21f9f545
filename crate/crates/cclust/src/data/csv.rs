//! Numeric CSV loader with an optional header row and optional label column.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DataError, Dataset};
use crate::matrix::Matrix;

/// Pick a column by position or by header name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ColumnRef {
    Index(usize),
    Name(String),
}

fn is_numeric_row(fields: &[&str]) -> bool {
    fields.iter().all(|f| f.trim().parse::<f64>().is_ok())
}

/// Load a rectangular numeric CSV. The first line is treated as a header
/// when any of its fields is non-numeric. Labels, when extracted, must be
/// non-negative integers.
pub fn load_csv(path: &Path, label_column: Option<&ColumnRef>) -> Result<Dataset, DataError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| DataError::Io { path: path.display().to_string(), message: e.to_string() })?;
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty())
        .peekable();

    let (header, width) = match lines.peek() {
        None => return Err(DataError::CsvError { row: 0, message: "file has no rows".into() }),
        Some(&(row, first)) => {
            let fields: Vec<&str> = first.split(',').collect();
            if is_numeric_row(&fields) {
                (None, fields.len())
            } else {
                lines.next();
                let names: Vec<String> = fields.iter().map(|f| f.trim().to_string()).collect();
                let _ = row;
                let w = names.len();
                (Some(names), w)
            }
        }
    };

    let label_idx = match label_column {
        None => None,
        Some(ColumnRef::Index(i)) => {
            if *i >= width {
                return Err(DataError::CsvError {
                    row: 0,
                    message: format!("label column {i} out of range for {width} columns"),
                });
            }
            Some(*i)
        }
        Some(ColumnRef::Name(name)) => {
            let header = header.as_ref().ok_or_else(|| DataError::CsvError {
                row: 0,
                message: format!("label column {name:?} requested but the file has no header"),
            })?;
            Some(header.iter().position(|h| h == name).ok_or_else(|| DataError::CsvError {
                row: 0,
                message: format!("label column {name:?} not found in header"),
            })?)
        }
    };

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<usize> = Vec::new();
    for (row_no, line) in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != width {
            return Err(DataError::CsvError {
                row: row_no,
                message: format!("expected {width} fields, found {}", fields.len()),
            });
        }
        let mut features = Vec::with_capacity(width - usize::from(label_idx.is_some()));
        for (col, field) in fields.iter().enumerate() {
            let value: f64 = field.trim().parse().map_err(|_| DataError::CsvError {
                row: row_no,
                message: format!("non-numeric cell {:?} in column {col}", field.trim()),
            })?;
            if Some(col) == label_idx {
                if value < 0.0 || value.fract() != 0.0 {
                    return Err(DataError::CsvError {
                        row: row_no,
                        message: format!("label {value} is not a non-negative integer"),
                    });
                }
                labels.push(value as usize);
            } else {
                features.push(value);
            }
        }
        rows.push(features);
    }
    if rows.is_empty() {
        return Err(DataError::CsvError { row: 0, message: "file has no data rows".into() });
    }

    let features = Matrix::from_rows(&rows);
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "csv".into());
    Dataset::new(features, label_idx.map(|_| labels), name)
}
