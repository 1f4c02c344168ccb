//! CSV loading with header auto-detection and an optional label column.

use std::path::Path;

use crate::dataset::GlobalDataset;
use crate::error::{Error, Result};
use ndarray::Array2;

/// Which column holds labels: by header name or by 0-based position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Name(String),
    Index(usize),
}

/// Loads a CSV of finite reals. `header`: Some(true/false) forces the first
/// row's role; None detects it (any cell that is not a number means header).
/// Rows in parse errors are 1-based data rows, the header excluded.
pub fn load_csv(
    path: &Path,
    label: Option<&LabelColumn>,
    header: Option<bool>,
) -> Result<GlobalDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let mut rows: Vec<csv::StringRecord> = Vec::new();
    for rec in reader.records() {
        rows.push(rec.map_err(|e| csv_error(path, e))?);
    }
    if rows.is_empty() {
        return Err(Error::EmptyDataset {
            path: path.display().to_string(),
        });
    }

    // Detection asks only whether the cell is a number; finiteness is a data
    // validation concern, so "inf" in row one means data, not header.
    let has_header = match header {
        Some(flag) => flag,
        None => rows[0].iter().any(|cell| cell.trim().parse::<f64>().is_err()),
    };
    let header_names: Option<Vec<String>> = if has_header {
        Some(rows[0].iter().map(str::to_owned).collect())
    } else {
        None
    };
    let data = &rows[if has_header { 1 } else { 0 }..];
    if data.is_empty() {
        return Err(Error::EmptyDataset {
            path: path.display().to_string(),
        });
    }

    let arity = match &header_names {
        Some(names) => names.len(),
        None => data[0].len(),
    };
    if arity == 0 {
        return Err(Error::Parse {
            path: path.display().to_string(),
            row: 1,
            column: "0".into(),
            message: "no columns".into(),
        });
    }
    let column_label = |j: usize| -> String {
        match &header_names {
            Some(names) => names[j].clone(),
            None => j.to_string(),
        }
    };

    let label_idx: Option<usize> = match label {
        None => None,
        Some(LabelColumn::Index(i)) => {
            if *i >= arity {
                return Err(Error::InvalidParam(format!(
                    "label column index {i} out of range for {arity} columns"
                )));
            }
            Some(*i)
        }
        Some(LabelColumn::Name(name)) => {
            let names = header_names.as_ref().ok_or_else(|| {
                Error::InvalidParam(format!(
                    "label column '{name}' requested but the file has no header row"
                ))
            })?;
            Some(names.iter().position(|n| n == name).ok_or_else(|| {
                Error::InvalidParam(format!("label column '{name}' not found in header"))
            })?)
        }
    };
    if label_idx.is_some() && arity == 1 {
        return Err(Error::InvalidParam(
            "label column would leave no feature columns".into(),
        ));
    }

    let n = data.len();
    let m = arity - usize::from(label_idx.is_some());
    let mut features = Array2::zeros((n, m));
    let mut labels: Vec<f64> = Vec::with_capacity(if label_idx.is_some() { n } else { 0 });
    for (r, rec) in data.iter().enumerate() {
        if rec.len() != arity {
            return Err(Error::Parse {
                path: path.display().to_string(),
                row: r + 1,
                column: rec.len().min(arity).to_string(),
                message: format!("expected {arity} fields, got {}", rec.len()),
            });
        }
        let mut c = 0;
        for (j, cell) in rec.iter().enumerate() {
            let v = parse_cell(cell).map_err(|message| Error::Parse {
                path: path.display().to_string(),
                row: r + 1,
                column: column_label(j),
                message,
            })?;
            if Some(j) == label_idx {
                labels.push(v);
            } else {
                features[[r, c]] = v;
                c += 1;
            }
        }
    }

    let mut ds = GlobalDataset::from_dense(
        features,
        if label_idx.is_some() { Some(labels) } else { None },
    )?;
    if let Some(names) = header_names {
        let feature_names: Vec<String> = names
            .iter()
            .enumerate()
            .filter(|(j, _)| Some(*j) != label_idx)
            .map(|(_, n)| n.clone())
            .collect();
        ds = ds.with_column_names(feature_names)?;
        if let Some(i) = label_idx {
            ds = ds.with_label_name(names[i].clone());
        }
    }
    Ok(ds)
}

fn parse_cell(cell: &str) -> std::result::Result<f64, String> {
    let v: f64 = cell
        .trim()
        .parse()
        .map_err(|_| format!("'{cell}' is not a number"))?;
    if !v.is_finite() {
        return Err(format!("non-finite value '{cell}'"));
    }
    Ok(v)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    if let csv::ErrorKind::Io(io) = e.into_kind() {
        Error::io(path, io)
    } else {
        Error::Parse {
            path: path.display().to_string(),
            row: 0,
            column: "0".into(),
            message: "malformed csv".into(),
        }
    }
}
