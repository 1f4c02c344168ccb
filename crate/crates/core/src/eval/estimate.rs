//! Mapping an observed partition back to the generator parameters: a
//! concentration matching the spread of party importances, and the position
//! of the real inter-party correlation inside its achievable range.

use serde::{Deserialize, Serialize};

use crate::corr::{GlobalCorr, PcorOptions};
use crate::dataset::{GlobalDataset, PartyPartition};
use crate::error::{Error, Result};
use crate::eval::shapley::ShapleyEstimate;
use crate::split::{extreme_bounds_from_corr, shuffle_bounds_from_corr, BrkgaConfig};

/// Clamp for zero entries after normalization; concentrations must be positive.
const ZERO_ALPHA_NUDGE: f64 = 1e-6;
/// Below this score range the interpolation coefficient is indeterminate.
pub const FLAT_RANGE_THRESHOLD: f64 = 1e-9;

/// Mean per-coordinate variance of Dirichlet(alphas).
pub fn dirichlet_mean_variance(alphas: &[f64]) -> Result<f64> {
    if alphas.is_empty() {
        return Err(Error::InvalidParam("alphas must be non-empty".into()));
    }
    if let Some(&a) = alphas.iter().find(|&&a| !(a > 0.0)) {
        return Err(Error::InvalidParam(format!(
            "alpha entries must be positive, got {a}"
        )));
    }
    let a0: f64 = alphas.iter().sum();
    let k = alphas.len() as f64;
    let total: f64 = alphas
        .iter()
        .map(|&a| a * (a0 - a) / (a0 * a0 * (a0 + 1.0)))
        .sum();
    Ok(total / k)
}

/// Per-coordinate variance of the symmetric Dirichlet with concentration
/// `alpha` over `parties` coordinates: (K-1) / (K^2 (K alpha + 1)).
pub fn symmetric_dirichlet_variance(parties: usize, alpha: f64) -> f64 {
    let k = parties as f64;
    (k - 1.0) / (k * k * (k * alpha + 1.0))
}

/// Inverts `symmetric_dirichlet_variance`: the symmetric concentration whose
/// per-coordinate variance equals `sigma`.
pub fn symmetric_alpha_from_variance(parties: usize, sigma: f64) -> Result<f64> {
    let k = parties as f64;
    if !(sigma > 0.0) {
        return Err(Error::DegenerateVariance(sigma));
    }
    let alpha = (k - 1.0 - k * k * sigma) / (k * k * k * sigma);
    if !(alpha > 0.0) {
        return Err(Error::InvalidParam(format!(
            "variance {sigma} exceeds what any positive symmetric concentration attains for {parties} parties"
        )));
    }
    Ok(alpha)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlphaEstimate {
    /// Importances normalized to sum 1, zeros nudged to stay positive.
    pub alpha_vec: Vec<f64>,
    /// Symmetric concentration with the same mean variance as Dir(alpha_vec).
    pub symmetric_alpha: f64,
}

/// Treats per-party importances as Dirichlet parameters: normalizes them into
/// `alpha_vec`, then summarizes the implied spread as the single symmetric
/// concentration with the same mean per-coordinate variance.
///
/// Importances are floored at 0 first (sampling noise can dip below), and a
/// normalized 0 is nudged to a small positive value.
pub fn estimate_alpha(shapley: &ShapleyEstimate) -> Result<AlphaEstimate> {
    estimate_alpha_from_importances(&shapley.per_party)
}

pub fn estimate_alpha_from_importances(per_party: &[f64]) -> Result<AlphaEstimate> {
    if per_party.is_empty() {
        return Err(Error::InvalidParam("no parties".into()));
    }
    let floored: Vec<f64> = per_party.iter().map(|&v| v.max(0.0)).collect();
    let sum: f64 = floored.iter().sum();
    if !(sum > 0.0) {
        return Err(Error::AllZeroImportance);
    }
    let mut alpha_vec: Vec<f64> = floored.iter().map(|&v| v / sum).collect();
    if alpha_vec.iter().any(|&a| a == 0.0) {
        for a in &mut alpha_vec {
            if *a == 0.0 {
                *a = ZERO_ALPHA_NUDGE;
            }
        }
        let s: f64 = alpha_vec.iter().sum();
        for a in &mut alpha_vec {
            *a /= s;
        }
    }
    let sigma = dirichlet_mean_variance(&alpha_vec)?;
    let symmetric_alpha = symmetric_alpha_from_variance(alpha_vec.len(), sigma)?;
    Ok(AlphaEstimate {
        alpha_vec,
        symmetric_alpha,
    })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BetaEstimate {
    /// Position of the real score inside [icor_min, icor_max], clipped to [0,1].
    pub beta: f64,
    pub icor_real: f64,
    pub icor_min: f64,
    pub icor_max: f64,
}

fn beta_from_bounds(icor_real: f64, icor_min: f64, icor_max: f64) -> Result<BetaEstimate> {
    let range = icor_max - icor_min;
    if range < FLAT_RANGE_THRESHOLD {
        return Err(Error::FlatIcorLandscape { range });
    }
    // The heuristic bounds can miss the true extremes, so the real value may
    // fall slightly outside; clipping keeps the coefficient interpretable.
    let beta = ((icor_real - icor_min) / range).clamp(0.0, 1.0);
    Ok(BetaEstimate {
        beta,
        icor_real,
        icor_min,
        icor_max,
    })
}

fn partition_prerequisites(
    ds: &GlobalDataset,
    part: &PartyPartition,
    opts: &PcorOptions,
) -> Result<(GlobalCorr, f64, Vec<usize>)> {
    part.check_matches(ds)?;
    if part.num_parties() < 2 {
        return Err(Error::InvalidParam(
            "beta estimation needs at least 2 parties".into(),
        ));
    }
    part.require_nonempty_parties()?;
    let corr = GlobalCorr::from_dataset(ds, opts.kind)?;
    let icor_real = corr.icor_of_parties(&part.all_party_columns(), opts)?;
    Ok((corr, icor_real, part.party_sizes()))
}

/// Where a real partition sits between the minimum and maximum inter-party
/// correlation achievable with its party sizes. Bounds come from the same
/// permutation search the splitter uses, so a split made at some level and
/// estimated back should land nearby.
pub fn estimate_beta(
    ds: &GlobalDataset,
    part: &PartyPartition,
    cfg: &BrkgaConfig,
    opts: &PcorOptions,
) -> Result<BetaEstimate> {
    let (corr, icor_real, counts) = partition_prerequisites(ds, part, opts)?;
    let (icor_min, icor_max) = extreme_bounds_from_corr(corr, &counts, cfg, opts)?;
    beta_from_bounds(icor_real, icor_min, icor_max)
}

/// Cheap variant: brackets the achievable range by scoring random shuffles
/// instead of searching. Bounds are looser, so the estimate is coarser.
pub fn estimate_beta_by_shuffling(
    ds: &GlobalDataset,
    part: &PartyPartition,
    shuffles: usize,
    seed: u64,
    opts: &PcorOptions,
) -> Result<BetaEstimate> {
    let (corr, icor_real, counts) = partition_prerequisites(ds, part, opts)?;
    let (icor_min, icor_max) = shuffle_bounds_from_corr(corr, &counts, shuffles, seed, opts)?;
    beta_from_bounds(icor_real, icor_min, icor_max)
}
