//! In-memory dataset, feature-to-party assignments, and image masking.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Column-compressed sparse matrix. Only what the loaders and column
/// extraction need; anything heavier should densify first.
#[derive(Debug, Clone)]
pub struct CscMatrix {
    nrows: usize,
    ncols: usize,
    /// len ncols+1; column j occupies indices[col_ptr[j]..col_ptr[j+1]]
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CscMatrix {
    /// Builds from per-column (row, value) lists. Rows within a column must be
    /// strictly increasing; the loaders guarantee that.
    pub fn from_columns(nrows: usize, columns: Vec<Vec<(usize, f64)>>) -> Self {
        let ncols = columns.len();
        let nnz: usize = columns.iter().map(Vec::len).sum();
        let mut col_ptr = Vec::with_capacity(ncols + 1);
        let mut row_idx = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        col_ptr.push(0);
        for col in columns {
            for (r, v) in col {
                debug_assert!(r < nrows);
                row_idx.push(r);
                values.push(v);
            }
            col_ptr.push(row_idx.len());
        }
        CscMatrix {
            nrows,
            ncols,
            col_ptr,
            row_idx,
            values,
        }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    fn fill_column(&self, j: usize, out: &mut [f64]) {
        out.fill(0.0);
        for k in self.col_ptr[j]..self.col_ptr[j + 1] {
            out[self.row_idx[k]] = self.values[k];
        }
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut a = Array2::zeros((self.nrows, self.ncols));
        for j in 0..self.ncols {
            for k in self.col_ptr[j]..self.col_ptr[j + 1] {
                a[[self.row_idx[k], j]] = self.values[k];
            }
        }
        a
    }
}

#[derive(Debug, Clone)]
pub enum FeatureStorage {
    Dense(Array2<f64>),
    Sparse(CscMatrix),
}

/// The full feature table before any split, plus optional labels held by the
/// primary party.
#[derive(Debug, Clone)]
pub struct GlobalDataset {
    features: FeatureStorage,
    labels: Option<Vec<f64>>,
    column_names: Option<Vec<String>>,
    label_name: Option<String>,
}

impl GlobalDataset {
    pub fn from_dense(features: Array2<f64>, labels: Option<Vec<f64>>) -> Result<Self> {
        let ds = GlobalDataset {
            features: FeatureStorage::Dense(features),
            labels,
            column_names: None,
            label_name: None,
        };
        ds.check_labels()?;
        Ok(ds)
    }

    pub fn from_sparse(features: CscMatrix, labels: Option<Vec<f64>>) -> Result<Self> {
        let ds = GlobalDataset {
            features: FeatureStorage::Sparse(features),
            labels,
            column_names: None,
            label_name: None,
        };
        ds.check_labels()?;
        Ok(ds)
    }

    fn check_labels(&self) -> Result<()> {
        if let Some(y) = &self.labels {
            if y.len() != self.n_samples() {
                return Err(Error::LabelLength {
                    got: y.len(),
                    expected: self.n_samples(),
                });
            }
        }
        Ok(())
    }

    pub fn with_column_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.n_features() {
            return Err(Error::InvalidParam(format!(
                "{} column names for {} features",
                names.len(),
                self.n_features()
            )));
        }
        self.column_names = Some(names);
        Ok(self)
    }

    pub fn with_label_name(mut self, name: impl Into<String>) -> Self {
        self.label_name = Some(name.into());
        self
    }

    pub fn n_samples(&self) -> usize {
        match &self.features {
            FeatureStorage::Dense(a) => a.nrows(),
            FeatureStorage::Sparse(s) => s.nrows,
        }
    }

    pub fn n_features(&self) -> usize {
        match &self.features {
            FeatureStorage::Dense(a) => a.ncols(),
            FeatureStorage::Sparse(s) => s.ncols,
        }
    }

    pub fn features(&self) -> &FeatureStorage {
        &self.features
    }

    pub fn labels(&self) -> Option<&[f64]> {
        self.labels.as_deref()
    }

    pub fn label_name(&self) -> Option<&str> {
        self.label_name.as_deref()
    }

    pub fn column_names(&self) -> Option<&[String]> {
        self.column_names.as_deref()
    }

    /// Header name of column j, or a positional fallback.
    pub fn column_name(&self, j: usize) -> String {
        match &self.column_names {
            Some(names) => names[j].clone(),
            None => format!("f{j}"),
        }
    }

    /// Writes column j into `out` (len n_samples).
    pub fn fill_column(&self, j: usize, out: &mut [f64]) {
        match &self.features {
            FeatureStorage::Dense(a) => {
                for (o, v) in out.iter_mut().zip(a.column(j)) {
                    *o = *v;
                }
            }
            FeatureStorage::Sparse(s) => s.fill_column(j, out),
        }
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.n_samples()];
        self.fill_column(j, &mut out);
        out
    }

    /// Dense view when the storage is already dense.
    pub fn dense_view(&self) -> Option<ArrayView2<'_, f64>> {
        match &self.features {
            FeatureStorage::Dense(a) => Some(a.view()),
            FeatureStorage::Sparse(_) => None,
        }
    }

    pub fn to_dense(&self) -> Array2<f64> {
        match &self.features {
            FeatureStorage::Dense(a) => a.clone(),
            FeatureStorage::Sparse(s) => s.to_dense(),
        }
    }

    /// n x |cols| matrix of the selected columns, in the order given.
    pub fn select_columns(&self, cols: &[usize]) -> Array2<f64> {
        let n = self.n_samples();
        let mut out = Array2::zeros((n, cols.len()));
        let mut buf = vec![0.0; n];
        for (k, &j) in cols.iter().enumerate() {
            self.fill_column(j, &mut buf);
            for (i, &v) in buf.iter().enumerate() {
                out[[i, k]] = v;
            }
        }
        out
    }
}

/// Which party owns each feature column. Total: every column belongs to
/// exactly one of `num_parties` parties.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartyPartition {
    assignment: Vec<u32>,
    num_parties: usize,
}

impl PartyPartition {
    pub fn new(assignment: Vec<u32>, num_parties: usize) -> Result<Self> {
        if num_parties == 0 {
            return Err(Error::InvalidParam("num_parties must be positive".into()));
        }
        if let Some((j, &p)) = assignment
            .iter()
            .enumerate()
            .find(|(_, &p)| p as usize >= num_parties)
        {
            return Err(Error::InvalidParam(format!(
                "feature {j} assigned to party {p}, but only {num_parties} parties exist"
            )));
        }
        Ok(PartyPartition {
            assignment,
            num_parties,
        })
    }

    /// Contiguous blocks: the first `sizes[0]` columns go to party 0, and so on.
    pub fn from_party_sizes(sizes: &[usize]) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::InvalidParam("no party sizes given".into()));
        }
        let mut assignment = Vec::with_capacity(sizes.iter().sum());
        for (p, &s) in sizes.iter().enumerate() {
            assignment.extend(std::iter::repeat(p as u32).take(s));
        }
        PartyPartition::new(assignment, sizes.len())
    }

    pub fn num_parties(&self) -> usize {
        self.num_parties
    }

    pub fn n_features(&self) -> usize {
        self.assignment.len()
    }

    pub fn assignment(&self) -> &[u32] {
        &self.assignment
    }

    pub fn party_of(&self, feature: usize) -> usize {
        self.assignment[feature] as usize
    }

    /// Columns owned by `party`, ascending. Ascending order is relied on for
    /// reproducibility: per-party matrices never depend on discovery order.
    pub fn party_columns(&self, party: usize) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|(_, &p)| p as usize == party)
            .map(|(j, _)| j)
            .collect()
    }

    pub fn all_party_columns(&self) -> Vec<Vec<usize>> {
        let mut cols = vec![Vec::new(); self.num_parties];
        for (j, &p) in self.assignment.iter().enumerate() {
            cols[p as usize].push(j);
        }
        cols
    }

    pub fn party_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.num_parties];
        for &p in &self.assignment {
            sizes[p as usize] += 1;
        }
        sizes
    }

    pub fn has_empty_party(&self) -> bool {
        self.party_sizes().contains(&0)
    }

    /// Errors unless every party owns at least one feature.
    pub fn require_nonempty_parties(&self) -> Result<()> {
        if let Some(p) = self.party_sizes().iter().position(|&s| s == 0) {
            return Err(Error::EmptyParty(p));
        }
        Ok(())
    }

    pub fn check_matches(&self, ds: &GlobalDataset) -> Result<()> {
        if self.assignment.len() != ds.n_features() {
            return Err(Error::AssignmentLength {
                got: self.assignment.len(),
                expected: ds.n_features(),
            });
        }
        Ok(())
    }
}

/// Shape metadata for datasets whose feature vectors are flattened images.
/// Flat index of pixel (c, h, w) is c*height*width + h*width + w.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImageLayout {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    /// Fill for pixels a party does not own.
    pub background_value: f64,
}

impl ImageLayout {
    pub fn feature_count(&self) -> usize {
        self.height * self.width * self.channels
    }

    pub fn check_matches(&self, n_features: usize) -> Result<()> {
        if self.height == 0 || self.width == 0 || self.channels == 0 {
            return Err(Error::InvalidParam(
                "image layout dimensions must be positive".into(),
            ));
        }
        if self.feature_count() != n_features {
            return Err(Error::LayoutMismatch {
                channels: self.channels,
                height: self.height,
                width: self.width,
                expected: self.feature_count(),
                got: n_features,
            });
        }
        Ok(())
    }
}

/// Full-size images as seen by one party: pixels it does not own are replaced
/// by the layout's background value. Returns an n x m matrix in the same flat
/// pixel order as the dataset, so positions stay aligned across parties.
pub fn flatten_image_split(
    ds: &GlobalDataset,
    part: &PartyPartition,
    layout: &ImageLayout,
    party: usize,
) -> Result<Array2<f64>> {
    part.check_matches(ds)?;
    layout.check_matches(ds.n_features())?;
    if party >= part.num_parties() {
        return Err(Error::InvalidParam(format!(
            "party {party} out of range for {} parties",
            part.num_parties()
        )));
    }
    let n = ds.n_samples();
    let m = ds.n_features();
    let mut out = Array2::from_elem((n, m), layout.background_value);
    let mut buf = vec![0.0; n];
    for j in 0..m {
        if part.party_of(j) == party {
            ds.fill_column(j, &mut buf);
            for (i, &v) in buf.iter().enumerate() {
                out[[i, j]] = v;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn partition_rejects_out_of_range_party() {
        assert!(PartyPartition::new(vec![0, 2, 1], 2).is_err());
        assert!(PartyPartition::new(vec![0, 1, 1], 2).is_ok());
    }

    #[test]
    fn party_columns_are_ascending_and_disjoint() {
        let part = PartyPartition::new(vec![1, 0, 1, 0, 2], 3).unwrap();
        assert_eq!(part.party_columns(0), vec![1, 3]);
        assert_eq!(part.party_columns(1), vec![0, 2]);
        assert_eq!(part.party_columns(2), vec![4]);
        assert_eq!(part.party_sizes(), vec![2, 2, 1]);
        let all = part.all_party_columns();
        let mut union: Vec<usize> = all.concat();
        union.sort_unstable();
        assert_eq!(union, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn from_party_sizes_builds_contiguous_blocks() {
        let part = PartyPartition::from_party_sizes(&[2, 3]).unwrap();
        assert_eq!(part.assignment(), &[0, 0, 1, 1, 1]);
        assert_eq!(part.num_parties(), 2);
    }

    #[test]
    fn empty_party_detection() {
        let part = PartyPartition::new(vec![0, 0, 2], 3).unwrap();
        assert!(part.has_empty_party());
        assert!(matches!(
            part.require_nonempty_parties(),
            Err(Error::EmptyParty(1))
        ));
    }

    #[test]
    fn sparse_round_trips_through_dense() {
        let csc = CscMatrix::from_columns(3, vec![vec![(0, 1.0), (2, -2.0)], vec![], vec![(1, 5.0)]]);
        let ds = GlobalDataset::from_sparse(csc, None).unwrap();
        assert_eq!(ds.to_dense(), array![[1.0, 0.0, 0.0], [0.0, 0.0, 5.0], [-2.0, 0.0, 0.0]]);
        assert_eq!(ds.column(0), vec![1.0, 0.0, -2.0]);
        assert_eq!(ds.column(1), vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn label_length_is_checked() {
        let err = GlobalDataset::from_dense(Array2::zeros((3, 2)), Some(vec![1.0, 2.0]));
        assert!(matches!(err, Err(Error::LabelLength { got: 2, expected: 3 })));
    }

    #[test]
    fn select_columns_keeps_requested_order() {
        let ds = GlobalDataset::from_dense(array![[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]], None).unwrap();
        let sel = ds.select_columns(&[2, 0]);
        assert_eq!(sel, array![[3.0, 1.0], [6.0, 4.0]]);
    }

    #[test]
    fn image_masking_keeps_owned_pixels_in_place() {
        // 2x2 single-channel image; party 0 owns pixels 0 and 3.
        let ds = GlobalDataset::from_dense(array![[1.0, 2.0, 3.0, 4.0]], None).unwrap();
        let part = PartyPartition::new(vec![0, 1, 1, 0], 2).unwrap();
        let layout = ImageLayout {
            height: 2,
            width: 2,
            channels: 1,
            background_value: 0.0,
        };
        let masked = flatten_image_split(&ds, &part, &layout, 0).unwrap();
        assert_eq!(masked, array![[1.0, 0.0, 0.0, 4.0]]);
        let other = flatten_image_split(&ds, &part, &layout, 1).unwrap();
        assert_eq!(other, array![[0.0, 2.0, 3.0, 0.0]]);
    }

    #[test]
    fn image_masking_identity_when_one_party_owns_all() {
        let ds = GlobalDataset::from_dense(array![[1.0, 2.0], [3.0, 4.0]], None).unwrap();
        let part = PartyPartition::new(vec![0, 0], 1).unwrap();
        let layout = ImageLayout {
            height: 1,
            width: 2,
            channels: 1,
            background_value: -7.0,
        };
        let masked = flatten_image_split(&ds, &part, &layout, 0).unwrap();
        assert_eq!(masked, ds.to_dense());
    }

    #[test]
    fn image_layout_must_match_feature_count() {
        let ds = GlobalDataset::from_dense(Array2::zeros((1, 5)), None).unwrap();
        let part = PartyPartition::new(vec![0; 5], 1).unwrap();
        let layout = ImageLayout {
            height: 2,
            width: 2,
            channels: 1,
            background_value: 0.0,
        };
        assert!(flatten_image_split(&ds, &part, &layout, 0).is_err());
    }
}
