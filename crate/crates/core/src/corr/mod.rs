//! Column-wise correlation matrices and the spectrum-based party metrics.
//!
//! The party-pair metric is the normalized standard deviation of the singular
//! values of the cross-party correlation matrix; the dataset-level metric
//! averages it over ordered party pairs against the within-party baseline.

mod svd;

pub use svd::{singular_spectrum, SingularSpectrum, SINGULAR_VALUE_FLOOR};

use std::str::FromStr;

use nalgebra::DMatrix;
use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{GlobalDataset, PartyPartition};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrelationKind {
    /// Rank correlation; robust to monotone transforms. The default.
    #[default]
    Spearman,
    Pearson,
}

impl FromStr for CorrelationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spearman" => Ok(CorrelationKind::Spearman),
            "pearson" => Ok(CorrelationKind::Pearson),
            other => Err(Error::InvalidParam(format!(
                "unknown correlation kind '{other}' (expected 'spearman' or 'pearson')"
            ))),
        }
    }
}

impl std::fmt::Display for CorrelationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CorrelationKind::Spearman => write!(f, "spearman"),
            CorrelationKind::Pearson => write!(f, "pearson"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PcorOptions {
    pub kind: CorrelationKind,
    /// Spectra of this size or smaller are always computed exactly.
    pub exact_dim_threshold: usize,
    /// Number of leading singular values kept on the iterative path.
    pub truncate_rank: usize,
}

impl Default for PcorOptions {
    fn default() -> Self {
        PcorOptions {
            kind: CorrelationKind::Spearman,
            exact_dim_threshold: 100,
            truncate_rank: 400,
        }
    }
}

impl PcorOptions {
    pub fn validate(&self) -> Result<()> {
        if self.exact_dim_threshold == 0 {
            return Err(Error::InvalidParam(
                "exact_dim_threshold must be positive".into(),
            ));
        }
        if self.truncate_rank == 0 {
            return Err(Error::InvalidParam("truncate_rank must be positive".into()));
        }
        Ok(())
    }
}

/// Average ranks (1-based) with ties sharing their mean rank.
fn average_ranks(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_unstable_by(|&a, &b| x[a].total_cmp(&x[b]).then(a.cmp(&b)));
    let mut out = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && x[idx[j]] == x[idx[i]] {
            j += 1;
        }
        // mean of ranks i+1..=j
        let avg = (i + j + 1) as f64 / 2.0;
        for k in i..j {
            out[idx[k]] = avg;
        }
        i = j;
    }
    out
}

/// Centered unit vector for one column, after the rank transform when the
/// kind is Spearman. A constant column becomes the zero vector, encoding
/// "correlates with nothing"; callers decide its self-correlation.
fn standardize_column(raw: &[f64], kind: CorrelationKind) -> Vec<f64> {
    let v = match kind {
        CorrelationKind::Spearman => average_ranks(raw),
        CorrelationKind::Pearson => raw.to_vec(),
    };
    let (min, max) = v
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    if min == max {
        return vec![0.0; v.len()];
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let mut u: Vec<f64> = v.iter().map(|&x| x - mean).collect();
    let norm = u.iter().map(|&x| x * x).sum::<f64>().sqrt();
    for x in &mut u {
        *x /= norm;
    }
    u
}

fn check_finite(x: ArrayView2<'_, f64>) -> Result<()> {
    for ((i, j), &v) in x.indexed_iter() {
        if !v.is_finite() {
            return Err(Error::NonFinite {
                row: i,
                column: j.to_string(),
            });
        }
    }
    Ok(())
}

fn standardized_columns(x: ArrayView2<'_, f64>, kind: CorrelationKind) -> Result<Vec<Vec<f64>>> {
    if x.nrows() < 2 {
        return Err(Error::TooFewSamples(x.nrows()));
    }
    check_finite(x)?;
    let mut raw = vec![0.0; x.nrows()];
    Ok((0..x.ncols())
        .map(|j| {
            for (o, v) in raw.iter_mut().zip(x.column(j)) {
                *o = *v;
            }
            standardize_column(&raw, kind)
        })
        .collect())
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

fn corr_entry(u: &[f64], v: &[f64]) -> f64 {
    dot(u, v).clamp(-1.0, 1.0)
}

/// p x q matrix of column correlations between `a` and `b`. A zero-variance
/// column correlates 0 with everything.
pub fn column_correlation(
    a: ArrayView2<'_, f64>,
    b: ArrayView2<'_, f64>,
    kind: CorrelationKind,
) -> Result<Array2<f64>> {
    if a.nrows() != b.nrows() {
        return Err(Error::InvalidParam(format!(
            "sample counts differ: {} vs {}",
            a.nrows(),
            b.nrows()
        )));
    }
    let ua = standardized_columns(a, kind)?;
    let ub = standardized_columns(b, kind)?;
    let mut c = Array2::zeros((ua.len(), ub.len()));
    for (i, u) in ua.iter().enumerate() {
        for (j, v) in ub.iter().enumerate() {
            c[[i, j]] = corr_entry(u, v);
        }
    }
    Ok(c)
}

/// m x m correlation matrix of the columns of `x` with themselves. The
/// diagonal is exactly 1, including for constant columns, so the result is
/// always a valid correlation matrix.
pub fn self_correlation(x: ArrayView2<'_, f64>, kind: CorrelationKind) -> Result<Array2<f64>> {
    let u = standardized_columns(x, kind)?;
    Ok(self_correlation_of(&u))
}

fn self_correlation_of(u: &[Vec<f64>]) -> Array2<f64> {
    let m = u.len();
    let mut c = Array2::zeros((m, m));
    for i in 0..m {
        c[[i, i]] = 1.0;
        for j in (i + 1)..m {
            let v = corr_entry(&u[i], &u[j]);
            c[[i, j]] = v;
            c[[j, i]] = v;
        }
    }
    c
}

/// Spectrum-based correlation of two column groups: 0 means uncorrelated,
/// 1 means perfectly correlated.
///
/// With d = min(m_i, m_j) and sigma the singular spectrum of the cross
/// correlation matrix, returns sqrt(sum (sigma_t - mean)^2 / (d-1)) / sqrt(d),
/// clamped into [0, 1]. At d = 1 the single singular value (the absolute
/// correlation) is returned directly, since the d-1 divisor is undefined and
/// the value already sits on the 0..1 scale.
pub fn pcor(
    xi: ArrayView2<'_, f64>,
    xj: ArrayView2<'_, f64>,
    opts: &PcorOptions,
) -> Result<f64> {
    if xi.ncols() == 0 || xj.ncols() == 0 {
        return Err(Error::InvalidParam("empty column group".into()));
    }
    let c = if same_data(&xi, &xj) {
        self_correlation(xi, opts.kind)?
    } else {
        column_correlation(xi, xj, opts.kind)?
    };
    let s = singular_spectrum(c.view(), opts)?;
    Ok(pcor_from_spectrum(&s))
}

fn same_data(a: &ArrayView2<'_, f64>, b: &ArrayView2<'_, f64>) -> bool {
    a.dim() == b.dim() && (std::ptr::eq(a.as_ptr(), b.as_ptr()) || a == b)
}

/// The spectrum-to-scalar step of the party-pair metric.
pub fn pcor_from_spectrum(s: &SingularSpectrum) -> f64 {
    spread_statistic(s.values())
}

/// Normalized standard deviation of a length-d spectrum; the single value
/// itself at d = 1.
fn spread_statistic(values: &[f64]) -> f64 {
    let d = values.len();
    if d == 1 {
        return values[0].clamp(0.0, 1.0);
    }
    let mean = values.iter().sum::<f64>() / d as f64;
    let var = values.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / (d as f64 - 1.0);
    (var.sqrt() / (d as f64).sqrt()).clamp(0.0, 1.0)
}

/// Eigenvalue analogue of the self-pcor: normalized standard deviation of the
/// eigenvalues of the self-correlation matrix. Independent computation route,
/// used to cross-check the spectrum path.
pub fn mcor(x: ArrayView2<'_, f64>, kind: CorrelationKind) -> Result<f64> {
    let m = x.ncols();
    if m < 2 {
        return Err(Error::InvalidParam(
            "mcor needs at least 2 columns".into(),
        ));
    }
    let c = self_correlation(x, kind)?;
    // Guard against numeric asymmetry before the symmetric eigensolver.
    let sym = DMatrix::from_fn(m, m, |i, j| 0.5 * (c[[i, j]] + c[[j, i]]));
    let eig = sym.symmetric_eigen();
    let lambda: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let mean = lambda.iter().sum::<f64>() / m as f64;
    let var = lambda.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / (m as f64 - 1.0);
    Ok(var.sqrt() / (m as f64).sqrt())
}

/// Overall inter-party correlation of a partitioned dataset: the mean over
/// ordered party pairs of pair-pcor minus the within-party self-pcor.
/// Negative values mean parties are internally more correlated than they are
/// with each other.
pub fn icor(ds: &GlobalDataset, part: &PartyPartition, opts: &PcorOptions) -> Result<f64> {
    part.check_matches(ds)?;
    let gc = GlobalCorr::from_dataset(ds, opts.kind)?;
    gc.icor_of_parties(&part.all_party_columns(), opts)
}

/// |approx - exact| / exact. Undefined at exact = 0.
pub fn pcor_relative_error(exact: f64, approx: f64) -> Result<f64> {
    if exact == 0.0 {
        return Err(Error::ZeroExactValue);
    }
    if exact < 0.0 {
        return Err(Error::InvalidParam(
            "exact pcor must be positive".into(),
        ));
    }
    Ok((approx - exact).abs() / exact)
}

/// Correlation matrix over all dataset columns, computed once. Any party
/// pair's correlation matrix is a row/column selection of it, so partition
/// searches never touch the raw samples after construction.
#[derive(Debug, Clone)]
pub struct GlobalCorr {
    kind: CorrelationKind,
    matrix: Array2<f64>,
}

impl GlobalCorr {
    pub fn from_dataset(ds: &GlobalDataset, kind: CorrelationKind) -> Result<Self> {
        let n = ds.n_samples();
        let m = ds.n_features();
        if n < 2 {
            return Err(Error::TooFewSamples(n));
        }
        if m == 0 {
            return Err(Error::InvalidParam("dataset has no features".into()));
        }
        let mut raw = vec![0.0; n];
        let cols: Vec<Vec<f64>> = (0..m)
            .map(|j| {
                ds.fill_column(j, &mut raw);
                if let Some(i) = raw.iter().position(|v| !v.is_finite()) {
                    return Err(Error::NonFinite {
                        row: i,
                        column: ds.column_name(j),
                    });
                }
                Ok(standardize_column(&raw, kind))
            })
            .collect::<Result<_>>()?;
        // Upper triangle rows in parallel; assembly order is fixed by index.
        let rows: Vec<Vec<f64>> = (0..m)
            .into_par_iter()
            .map(|i| ((i + 1)..m).map(|j| corr_entry(&cols[i], &cols[j])).collect())
            .collect();
        let mut matrix = Array2::zeros((m, m));
        for i in 0..m {
            matrix[[i, i]] = 1.0;
            for (off, &v) in rows[i].iter().enumerate() {
                let j = i + 1 + off;
                matrix[[i, j]] = v;
                matrix[[j, i]] = v;
            }
        }
        Ok(GlobalCorr { kind, matrix })
    }

    pub fn kind(&self) -> CorrelationKind {
        self.kind
    }

    pub fn n_features(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> ArrayView2<'_, f64> {
        self.matrix.view()
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Array2<f64> {
        Array2::from_shape_fn((rows.len(), cols.len()), |(a, b)| {
            self.matrix[[rows[a], cols[b]]]
        })
    }

    /// Pair correlation between two column groups. With `cols_i == cols_j`
    /// this is the within-group self value, since the stored diagonal is 1.
    pub fn pair_pcor(&self, cols_i: &[usize], cols_j: &[usize], opts: &PcorOptions) -> Result<f64> {
        if cols_i.is_empty() || cols_j.is_empty() {
            return Err(Error::InvalidParam("empty column group".into()));
        }
        let sub = self.submatrix(cols_i, cols_j);
        let s = singular_spectrum(sub.view(), opts)?;
        Ok(pcor_from_spectrum(&s))
    }

    /// K x K matrix of pair correlations; diagonal holds the self values.
    pub fn pcor_matrix(&self, parties: &[Vec<usize>], opts: &PcorOptions) -> Result<Array2<f64>> {
        let k = parties.len();
        let mut out = Array2::zeros((k, k));
        for i in 0..k {
            out[[i, i]] = self.pair_pcor(&parties[i], &parties[i], opts)?;
            for j in (i + 1)..k {
                let v = self.pair_pcor(&parties[i], &parties[j], opts)?;
                out[[i, j]] = v;
                out[[j, i]] = v;
            }
        }
        Ok(out)
    }

    /// Ordered-pair mean of (pair pcor - self pcor). Pair terms are evaluated
    /// in parallel and reduced in index order, so the result does not depend
    /// on the worker count.
    pub fn icor_of_parties(&self, parties: &[Vec<usize>], opts: &PcorOptions) -> Result<f64> {
        let k = parties.len();
        if k < 2 {
            return Err(Error::InvalidParam(
                "icor needs at least 2 parties".into(),
            ));
        }
        for (p, cols) in parties.iter().enumerate() {
            if cols.is_empty() {
                return Err(Error::EmptyParty(p));
            }
        }
        let inner: Vec<f64> = parties
            .par_iter()
            .map(|cols| self.pair_pcor(cols, cols, opts))
            .collect::<Result<_>>()?;
        let pairs: Vec<(usize, usize)> = (0..k)
            .flat_map(|i| ((i + 1)..k).map(move |j| (i, j)))
            .collect();
        let cross: Vec<f64> = pairs
            .par_iter()
            .map(|&(i, j)| self.pair_pcor(&parties[i], &parties[j], opts))
            .collect::<Result<_>>()?;
        let cross_sum: f64 = cross.iter().sum();
        let inner_sum: f64 = inner.iter().sum();
        let kf = k as f64;
        Ok((2.0 * cross_sum - (kf - 1.0) * inner_sum) / (kf * (kf - 1.0)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn opts() -> PcorOptions {
        PcorOptions::default()
    }

    fn pearson_opts() -> PcorOptions {
        PcorOptions {
            kind: CorrelationKind::Pearson,
            ..PcorOptions::default()
        }
    }

    #[test]
    fn ranks_average_ties() {
        assert_eq!(average_ranks(&[10.0, 20.0, 30.0]), vec![1.0, 2.0, 3.0]);
        assert_eq!(average_ranks(&[5.0, 5.0, 1.0]), vec![2.5, 2.5, 1.0]);
        assert_eq!(average_ranks(&[2.0, 2.0, 2.0]), vec![2.0, 2.0, 2.0]);
    }

    #[test]
    fn column_with_itself_is_one() {
        let x = array![[1.0], [4.0], [2.0], [3.5]];
        for kind in [CorrelationKind::Spearman, CorrelationKind::Pearson] {
            let c = column_correlation(x.view(), x.view(), kind).unwrap();
            assert!((c[[0, 0]] - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn spearman_ignores_monotone_transform() {
        let x = array![[0.1], [2.0], [1.0], [3.0]];
        let y = x.mapv(|v: f64| v.exp());
        let c = column_correlation(x.view(), y.view(), CorrelationKind::Spearman).unwrap();
        assert_eq!(c[[0, 0]], 1.0);
    }

    #[test]
    fn pearson_exact_anticorrelation() {
        let x = array![[1.0], [2.0], [3.0]];
        let y = array![[3.0], [2.0], [1.0]];
        let c = column_correlation(x.view(), y.view(), CorrelationKind::Pearson).unwrap();
        assert!((c[[0, 0]] + 1.0).abs() <= 1e-12);
    }

    #[test]
    fn zero_variance_column_correlates_zero() {
        let x = array![[1.0, 7.0], [2.0, 7.0], [3.0, 7.0]];
        let c = column_correlation(x.view(), x.view(), CorrelationKind::Pearson).unwrap();
        assert_eq!(c[[0, 1]], 0.0);
        assert_eq!(c[[1, 1]], 0.0);
        // Self-correlation keeps a unit diagonal even for the constant column.
        let s = self_correlation(x.view(), CorrelationKind::Pearson).unwrap();
        assert_eq!(s[[1, 1]], 1.0);
        assert_eq!(s[[0, 1]], 0.0);
    }

    #[test]
    fn too_few_samples_is_an_error() {
        let x = array![[1.0, 2.0]];
        assert!(matches!(
            column_correlation(x.view(), x.view(), CorrelationKind::Pearson),
            Err(Error::TooFewSamples(1))
        ));
    }

    #[test]
    fn pcor_of_identical_copies_is_one() {
        // Three copies of one column: spectrum {3, 0, 0}, mean 1,
        // variance 3, value sqrt(3/2)/sqrt(3) ... = 1 by the hand computation.
        let base = [1.0, 4.0, 2.0, 8.0, 5.0];
        let x = Array2::from_shape_fn((5, 3), |(i, _)| base[i]);
        for o in [opts(), pearson_opts()] {
            let v = pcor(x.view(), x.view(), &o).unwrap();
            assert!((v - 1.0).abs() <= 1e-12, "got {v}");
        }
    }

    #[test]
    fn pcor_single_monotone_pair_is_one() {
        let x = array![[1.0], [2.0], [3.0], [4.0]];
        let y = array![[10.0], [20.0], [40.0], [80.0]];
        let v = pcor(x.view(), y.view(), &opts()).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn pcor_of_independent_columns_is_near_zero() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let x = Array2::from_shape_fn((10_000, 6), |_| rng.gen::<f64>() - 0.5);
        let v = pcor(x.view(), x.view(), &opts()).unwrap();
        assert!(v < 0.05, "got {v}");
    }

    #[test]
    fn pcor_is_symmetric_bitwise() {
        let x = array![[1.0, 0.5], [2.0, -0.3], [0.0, 2.2], [4.0, 1.1], [3.0, -2.0]];
        let y = array![[2.0, 1.0, 0.0], [1.0, 3.0, 2.0], [5.0, -1.0, 1.0], [0.5, 2.0, 4.0], [1.5, 0.0, 3.0]];
        for o in [opts(), pearson_opts()] {
            let a = pcor(x.view(), y.view(), &o).unwrap();
            let b = pcor(y.view(), x.view(), &o).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn mcor_zero_for_orthogonal_columns() {
        // Columns whose ranks are exactly uncorrelated.
        let x = array![[1.0, 2.0], [2.0, 4.0], [3.0, 1.0], [4.0, 3.0]];
        let v = mcor(x.view(), CorrelationKind::Spearman).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn mcor_one_for_perfectly_correlated_columns() {
        let base = [3.0, 1.0, 4.0, 1.5, 9.0];
        let x = Array2::from_shape_fn((5, 4), |(i, j)| base[i] * (j as f64 + 1.0));
        let v = mcor(x.view(), CorrelationKind::Pearson).unwrap();
        assert!((v - 1.0).abs() <= 1e-12, "got {v}");
    }

    #[test]
    fn mcor_matches_self_pcor_on_random_input() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let x = Array2::from_shape_fn((50, 8), |_| rng.gen::<f64>() * 2.0 - 1.0);
        for o in [opts(), pearson_opts()] {
            let p = pcor(x.view(), x.view(), &o).unwrap();
            let m = mcor(x.view(), o.kind).unwrap();
            assert!((p - m).abs() <= 1e-9, "pcor {p} vs mcor {m}");
        }
    }

    /// Four-sample pair whose ranks are exactly uncorrelated; products are
    /// dyadic so the correlation is exactly zero in floating point.
    fn orthogonal_pair() -> (Vec<f64>, Vec<f64>) {
        (vec![1.0, 2.0, 3.0, 4.0], vec![2.0, 4.0, 1.0, 3.0])
    }

    #[test]
    fn icor_duplicated_features_hit_lower_bound() {
        let (a, b) = orthogonal_pair();
        // Party 0 = two copies of a, party 1 = two copies of b.
        let x = Array2::from_shape_fn((4, 4), |(i, j)| if j < 2 { a[i] } else { b[i] });
        let ds = GlobalDataset::from_dense(x, None).unwrap();
        let part = PartyPartition::new(vec![0, 0, 1, 1], 2).unwrap();
        let v = icor(&ds, &part, &opts()).unwrap();
        assert!((v + 1.0).abs() <= 1e-12, "got {v}");
    }

    #[test]
    fn icor_identity_cross_is_zero() {
        let (a, b) = orthogonal_pair();
        // Both parties hold {a, b}: all pair matrices are the identity up to
        // roundoff in the duplicated-column entries.
        let x = Array2::from_shape_fn((4, 4), |(i, j)| if j % 2 == 0 { a[i] } else { b[i] });
        let ds = GlobalDataset::from_dense(x, None).unwrap();
        let part = PartyPartition::new(vec![0, 0, 1, 1], 2).unwrap();
        let v = icor(&ds, &part, &opts()).unwrap();
        assert!(v.abs() <= 1e-12, "got {v}");
    }

    #[test]
    fn icor_invariant_under_party_relabeling() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let x = Array2::from_shape_fn((40, 9), |_| rng.gen::<f64>());
        let ds = GlobalDataset::from_dense(x, None).unwrap();
        let part = PartyPartition::new(vec![0, 1, 2, 0, 1, 2, 0, 1, 2], 3).unwrap();
        let relabeled: Vec<u32> = part.assignment().iter().map(|&p| (p + 1) % 3).collect();
        let swapped = PartyPartition::new(relabeled, 3).unwrap();
        let a = icor(&ds, &part, &opts()).unwrap();
        let b = icor(&ds, &swapped, &opts()).unwrap();
        // Relabeling reorders the pair sums, so equality holds to roundoff.
        assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
    }

    #[test]
    fn relative_error_examples() {
        assert_eq!(pcor_relative_error(0.5, 0.5).unwrap(), 0.0);
        assert!((pcor_relative_error(0.5, 0.4).unwrap() - 0.2).abs() <= 1e-12);
        assert!(matches!(
            pcor_relative_error(0.0, 0.3),
            Err(Error::ZeroExactValue)
        ));
    }

    #[test]
    fn global_corr_pair_values_match_direct_pcor() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let x = Array2::from_shape_fn((30, 7), |_| rng.gen::<f64>());
        let ds = GlobalDataset::from_dense(x.clone(), None).unwrap();
        let gc = GlobalCorr::from_dataset(&ds, CorrelationKind::Spearman).unwrap();
        let ci = vec![0, 2, 5];
        let cj = vec![1, 3, 4, 6];
        let via_cache = gc.pair_pcor(&ci, &cj, &opts()).unwrap();
        let xi = ds.select_columns(&ci);
        let xj = ds.select_columns(&cj);
        let direct = pcor(xi.view(), xj.view(), &opts()).unwrap();
        assert!((via_cache - direct).abs() <= 1e-12);
        // Self value through the cached diagonal path.
        let via_cache_self = gc.pair_pcor(&ci, &ci, &opts()).unwrap();
        let direct_self = pcor(xi.view(), xi.view(), &opts()).unwrap();
        assert!((via_cache_self - direct_self).abs() <= 1e-12);
    }

    #[test]
    fn icor_methods_agree() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(19);
        let x = Array2::from_shape_fn((25, 8), |_| rng.gen::<f64>());
        let ds = GlobalDataset::from_dense(x, None).unwrap();
        let part = PartyPartition::new(vec![0, 0, 1, 1, 1, 2, 2, 2], 3).unwrap();
        let whole = icor(&ds, &part, &opts()).unwrap();
        // Manual ordered-pair sum from the definition.
        let parties = part.all_party_columns();
        let mut total = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                if i == j {
                    continue;
                }
                let xi = ds.select_columns(&parties[i]);
                let xj = ds.select_columns(&parties[j]);
                total += pcor(xi.view(), xj.view(), &opts()).unwrap()
                    - pcor(xi.view(), xi.view(), &opts()).unwrap();
            }
        }
        let manual = total / 6.0;
        assert!((whole - manual).abs() <= 1e-12, "{whole} vs {manual}");
    }
}
