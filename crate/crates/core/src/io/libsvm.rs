//! Sparse libsvm/svmlight reader: `label idx:val ...` with 1-based,
//! strictly increasing indices per line.

use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::dataset::{CscMatrix, GlobalDataset};
use crate::error::{Error, Result};

/// Fraction of nonzeros at or above which the matrix is stored densely.
pub const DENSIFY_THRESHOLD: f64 = 0.5;

/// Loads a libsvm file. The feature count is the maximum index seen.
/// Blank lines are skipped; a line with only a label is an all-zero row.
pub fn load_libsvm(path: &Path) -> Result<GlobalDataset> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);

    let mut labels: Vec<f64> = Vec::new();
    // (row, col0, value) triplets in row order.
    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    let mut max_index = 0usize;
    let mut row = 0usize;

    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let parse = |token: &str, what: &str, message: String| Error::Parse {
            path: path.display().to_string(),
            row: lineno + 1,
            column: format!("{what} '{token}'"),
            message,
        };
        let mut tokens = line.split_whitespace();
        let label_tok = tokens.next().expect("non-empty line has a first token");
        let label: f64 = label_tok
            .parse()
            .map_err(|_| parse(label_tok, "label", "not a number".into()))?;
        if !label.is_finite() {
            return Err(parse(label_tok, "label", "non-finite value".into()));
        }
        labels.push(label);

        let mut prev_index = 0usize;
        for tok in tokens {
            let (idx_s, val_s) = tok
                .split_once(':')
                .ok_or_else(|| parse(tok, "feature", "expected index:value".into()))?;
            let idx: usize = idx_s
                .parse()
                .map_err(|_| parse(tok, "feature index", "not an integer".into()))?;
            if idx == 0 {
                return Err(parse(tok, "feature index", "indices are 1-based".into()));
            }
            if idx <= prev_index {
                return Err(parse(
                    tok,
                    "feature index",
                    format!("index {idx} not greater than previous {prev_index}"),
                ));
            }
            let val: f64 = val_s
                .parse()
                .map_err(|_| parse(tok, "feature value", "not a number".into()))?;
            if !val.is_finite() {
                return Err(parse(tok, "feature value", "non-finite value".into()));
            }
            triplets.push((row, idx - 1, val));
            prev_index = idx;
            max_index = max_index.max(idx);
        }
        row += 1;
    }

    if row == 0 {
        return Err(Error::EmptyDataset {
            path: path.display().to_string(),
        });
    }
    if max_index == 0 {
        return Err(Error::Parse {
            path: path.display().to_string(),
            row: 1,
            column: "features".into(),
            message: "no feature entries in the whole file".into(),
        });
    }

    let n = row;
    let m = max_index;
    let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
    for (r, c, v) in triplets {
        columns[c].push((r, v));
    }
    let nnz: usize = columns.iter().map(Vec::len).sum();
    let density = nnz as f64 / (n as f64 * m as f64);
    let sparse = CscMatrix::from_columns(n, columns);
    let mut ds = if density >= DENSIFY_THRESHOLD {
        GlobalDataset::from_dense(sparse.to_dense(), Some(labels))?
    } else {
        GlobalDataset::from_sparse(sparse, Some(labels))?
    };
    ds = ds.with_label_name("label");
    Ok(ds)
}
