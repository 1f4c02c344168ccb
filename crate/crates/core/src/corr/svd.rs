//! Singular spectra of correlation matrices: exact, or iterative top-k with
//! the tail assumed zero.

use nalgebra::DMatrix;
use ndarray::ArrayView2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::corr::PcorOptions;
use crate::error::{Error, Result};

/// Singular values below this are treated as exact zeros.
pub const SINGULAR_VALUE_FLOOR: f64 = 1e-12;

/// Extra subspace columns beyond the requested top-k.
const OVERSAMPLE: usize = 10;
const MAX_ITERATIONS: usize = 500;
/// Relative stagnation threshold on the Ritz values.
const CONVERGENCE_TOL: f64 = 1e-10;
/// Stream for the randomized subspace start. Fixed: the iterative spectrum is
/// a deterministic function of its input.
const SUBSPACE_SEED: u64 = 0x9e37_79b9_7f4a_7c15;

/// Length-d non-increasing singular spectrum, d = min(p, q). When truncated,
/// entries past the computed top block are exact zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularSpectrum {
    values: Vec<f64>,
    truncated: bool,
}

impl SingularSpectrum {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn d(&self) -> usize {
        self.values.len()
    }

    pub fn truncated(&self) -> bool {
        self.truncated
    }
}

/// Singular values of `c`, non-increasing, length min(p, q).
///
/// Exact decomposition when min(p, q) is at or below `opts.exact_dim_threshold`
/// or when `opts.truncate_rank` covers the full spectrum (nothing would be
/// dropped, so the exact path is both cheaper to reason about and lossless).
/// Otherwise the top `truncate_rank` values are found by randomized subspace
/// iteration and the remainder is assumed zero.
pub fn singular_spectrum(c: ArrayView2<'_, f64>, opts: &PcorOptions) -> Result<SingularSpectrum> {
    opts.validate()?;
    let (p, q) = c.dim();
    let d = p.min(q);
    if d == 0 {
        return Err(Error::InvalidParam("empty correlation matrix".into()));
    }
    // Canonical tall orientation: transposing the input must not change the
    // result bit for bit, since spectra of C and C^T coincide.
    let mat = to_tall(c);
    if d <= opts.exact_dim_threshold || opts.truncate_rank >= d {
        let values = exact_singular_values(mat);
        return Ok(SingularSpectrum {
            values,
            truncated: false,
        });
    }
    let k = opts.truncate_rank;
    let mut values = subspace_top_k(&mat, k)?;
    values.resize(d, 0.0);
    Ok(SingularSpectrum {
        values,
        truncated: true,
    })
}

fn to_tall(c: ArrayView2<'_, f64>) -> DMatrix<f64> {
    let (p, q) = c.dim();
    // Square matrices have no tall side; pick the lexicographically smaller
    // of C and C^T so the transpose still maps to the same bytes.
    let transpose = match p.cmp(&q) {
        std::cmp::Ordering::Greater => false,
        std::cmp::Ordering::Less => true,
        std::cmp::Ordering::Equal => c
            .iter()
            .zip(c.t().iter())
            .find_map(|(a, b)| match a.total_cmp(b) {
                std::cmp::Ordering::Equal => None,
                other => Some(other == std::cmp::Ordering::Greater),
            })
            .unwrap_or(false),
    };
    if transpose {
        DMatrix::from_fn(q, p, |i, j| c[[j, i]])
    } else {
        DMatrix::from_fn(p, q, |i, j| c[[i, j]])
    }
}

fn exact_singular_values(mat: DMatrix<f64>) -> Vec<f64> {
    let svd = mat.svd(false, false);
    let mut values: Vec<f64> = svd.singular_values.iter().copied().collect();
    values.sort_unstable_by(|a, b| b.total_cmp(a));
    floor_values(&mut values);
    values
}

fn floor_values(values: &mut [f64]) {
    for v in values.iter_mut() {
        if *v < SINGULAR_VALUE_FLOOR {
            *v = 0.0;
        }
    }
}

/// Top-k singular values of a tall matrix by subspace iteration on the
/// Gram operator, with Ritz values from the projected matrix.
fn subspace_top_k(mat: &DMatrix<f64>, k: usize) -> Result<Vec<f64>> {
    let (p, q) = mat.shape();
    debug_assert!(p >= q && k < q);
    let l = (k + OVERSAMPLE).min(q);
    let mut rng = ChaCha8Rng::seed_from_u64(SUBSPACE_SEED);
    let mut v = DMatrix::from_fn(q, l, |_, _| StandardNormal.sample(&mut rng));
    v = orthonormalize(v);
    let mut prev = vec![0.0; k];
    for _ in 0..MAX_ITERATIONS {
        let z = mat * &v; // p x l
        let gram = z.transpose() * &z; // l x l, eigenvalues are sigma^2
        let mut sigma: Vec<f64> = gram
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .map(|&lambda| lambda.max(0.0).sqrt())
            .collect();
        sigma.sort_unstable_by(|a, b| b.total_cmp(a));
        sigma.truncate(k);
        let scale = sigma.first().copied().unwrap_or(0.0).max(1.0);
        let drift = sigma
            .iter()
            .zip(&prev)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0_f64, f64::max);
        if drift <= CONVERGENCE_TOL * scale {
            floor_values(&mut sigma);
            return Ok(sigma);
        }
        prev = sigma;
        let w = mat.transpose() * z; // q x l
        v = orthonormalize(w);
    }
    Err(Error::SvdNoConvergence {
        iterations: MAX_ITERATIONS,
    })
}

fn orthonormalize(m: DMatrix<f64>) -> DMatrix<f64> {
    let (rows, cols) = m.shape();
    let qr = m.qr();
    let q = qr.q();
    debug_assert_eq!(q.shape(), (rows, cols));
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    fn exact_opts() -> PcorOptions {
        PcorOptions::default()
    }

    #[test]
    fn identity_spectrum_is_all_ones() {
        let c = Array2::<f64>::eye(2);
        let s = singular_spectrum(c.view(), &exact_opts()).unwrap();
        assert_eq!(s.values(), &[1.0, 1.0]);
        assert!(!s.truncated());
    }

    #[test]
    fn rank_one_all_ones_matrix() {
        let c = Array2::<f64>::ones((3, 3));
        let s = singular_spectrum(c.view(), &exact_opts()).unwrap();
        assert!((s.values()[0] - 3.0).abs() <= 1e-12);
        assert_eq!(&s.values()[1..], &[0.0, 0.0]);
    }

    #[test]
    fn rectangular_d_is_min_dimension() {
        let c = Array2::<f64>::zeros((5, 3));
        let s = singular_spectrum(c.view(), &exact_opts()).unwrap();
        assert_eq!(s.d(), 3);
        assert_eq!(s.values(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn transpose_gives_bitwise_identical_spectrum() {
        let c = array![[0.3, -0.7, 0.2], [0.9, 0.1, -0.4]];
        let a = singular_spectrum(c.view(), &exact_opts()).unwrap();
        let b = singular_spectrum(c.t(), &exact_opts()).unwrap();
        assert_eq!(a.values(), b.values());
    }

    #[test]
    fn full_rank_budget_takes_lossless_path() {
        // min dim above the exact threshold, but truncate_rank covers it.
        let opts = PcorOptions {
            exact_dim_threshold: 2,
            truncate_rank: 8,
            ..PcorOptions::default()
        };
        let c = Array2::from_shape_fn((8, 8), |(i, j)| ((i * 31 + j * 17) % 7) as f64 / 7.0);
        let s = singular_spectrum(c.view(), &opts).unwrap();
        assert!(!s.truncated());
        let exact = singular_spectrum(c.view(), &exact_opts()).unwrap();
        assert_eq!(s.values(), exact.values());
    }

    #[test]
    fn iterative_top_k_matches_exact_head() {
        // Low-rank-plus-noise input so the top values are well separated.
        let n = 40;
        let c = Array2::from_shape_fn((n, n), |(i, j)| {
            let a = (i as f64 / n as f64 - 0.5) * (j as f64 / n as f64 - 0.5);
            let b = ((i + 2 * j) % 5) as f64 * 1e-3;
            4.0 * a + b
        });
        let opts = PcorOptions {
            exact_dim_threshold: 4,
            truncate_rank: 6,
            ..PcorOptions::default()
        };
        let approx = singular_spectrum(c.view(), &opts).unwrap();
        assert!(approx.truncated());
        assert_eq!(approx.d(), n);
        let exact = singular_spectrum(c.view(), &exact_opts()).unwrap();
        for t in 0..6 {
            assert!(
                (approx.values()[t] - exact.values()[t]).abs() <= 1e-8 * exact.values()[0].max(1.0),
                "top value {t} diverged: {} vs {}",
                approx.values()[t],
                exact.values()[t]
            );
        }
        for t in 6..n {
            assert_eq!(approx.values()[t], 0.0);
        }
    }

    #[test]
    fn zero_matrix_converges_immediately() {
        let c = Array2::<f64>::zeros((30, 30));
        let opts = PcorOptions {
            exact_dim_threshold: 4,
            truncate_rank: 6,
            ..PcorOptions::default()
        };
        let s = singular_spectrum(c.view(), &opts).unwrap();
        assert!(s.values().iter().all(|&v| v == 0.0));
    }
}
