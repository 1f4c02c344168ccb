//! Correlation-targeted splitting.
//!
//! Searches column permutations whose contiguous cut into fixed party sizes
//! attains a chosen inter-party correlation: two extreme searches bound the
//! achievable range, the requested level interpolates between them, and a
//! final search plus a pairwise-swap descent closes in on that target.

use std::collections::HashMap;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::corr::{GlobalCorr, PcorOptions};
use crate::dataset::{GlobalDataset, PartyPartition};
use crate::error::{Error, Result};
use crate::split::brkga::{minimize_permutation, BrkgaConfig, PermutationGenome};

/// Improvements smaller than this are treated as noise by the swap descent.
const DESCENT_EPSILON: f64 = 1e-12;
const MAX_DESCENT_PASSES: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtremeDirection {
    Min,
    Max,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrSplitResult {
    pub partition: PartyPartition,
    pub icor_achieved: f64,
    pub icor_min: f64,
    pub icor_max: f64,
    pub icor_target: f64,
    /// |achieved - target|, reported as-is.
    pub gap: f64,
    /// Total evolution generations across the bound searches and the target
    /// search.
    pub generations_used: usize,
}

/// Party sizes as equal as possible, any remainder going to the
/// lowest-indexed parties.
pub fn equal_counts(n_features: usize, parties: usize) -> Result<Vec<usize>> {
    if parties == 0 {
        return Err(Error::InvalidParam("need at least one party".into()));
    }
    if n_features < parties {
        return Err(Error::InvalidParam(format!(
            "cannot give {parties} parties at least one feature out of {n_features}"
        )));
    }
    let base = n_features / parties;
    let rem = n_features % parties;
    Ok((0..parties)
        .map(|p| base + usize::from(p < rem))
        .collect())
}

fn validate_counts(counts: &[usize], n_features: usize) -> Result<()> {
    if counts.len() < 2 {
        return Err(Error::InvalidParam(
            "correlation splitting needs at least 2 parties".into(),
        ));
    }
    if counts.contains(&0) {
        return Err(Error::InvalidParam("party counts must be positive".into()));
    }
    if counts.iter().sum::<usize>() != n_features {
        return Err(Error::CountMismatch {
            counts: counts.to_vec(),
            total: n_features,
        });
    }
    Ok(())
}

fn validate_permutation(perm: &[usize], n_features: usize) -> Result<()> {
    if perm.len() != n_features {
        return Err(Error::AssignmentLength {
            got: perm.len(),
            expected: n_features,
        });
    }
    let mut seen = vec![false; n_features];
    for &f in perm {
        if f >= n_features || seen[f] {
            return Err(Error::InvalidParam(format!(
                "not a permutation of 0..{n_features}"
            )));
        }
        seen[f] = true;
    }
    Ok(())
}

/// Cuts the permuted column order into contiguous blocks of the given sizes:
/// the first counts[0] entries of `perm` go to party 0, and so on.
pub fn partition_from_permutation(perm: &[usize], counts: &[usize]) -> Result<PartyPartition> {
    validate_counts(counts, perm.len())?;
    validate_permutation(perm, perm.len())?;
    let mut assignment = vec![0u32; perm.len()];
    let mut pos = 0;
    for (party, &size) in counts.iter().enumerate() {
        for &feature in &perm[pos..pos + size] {
            assignment[feature] = party as u32;
        }
        pos += size;
    }
    PartyPartition::new(assignment, counts.len())
}

/// The score a permutation receives: the inter-party correlation of its
/// contiguous cut.
pub fn icor_of_permutation(
    ds: &GlobalDataset,
    perm: &[usize],
    counts: &[usize],
    opts: &PcorOptions,
) -> Result<f64> {
    let ctx = SearchCtx::new(ds, counts, opts)?;
    validate_permutation(perm, ds.n_features())?;
    Ok(ctx.icor_of_perm(perm))
}

/// Shared state for one search instance: the dataset collapses to its global
/// correlation matrix (every pair's correlation matrix is a submatrix of it),
/// and scores are memoized by the induced feature-to-party assignment, which
/// also makes within-party reordering visibly irrelevant.
struct SearchCtx<'a> {
    corr: GlobalCorr,
    counts: &'a [usize],
    opts: &'a PcorOptions,
    party_of_position: Vec<u32>,
    memo: Mutex<HashMap<Vec<u32>, f64>>,
}

impl<'a> SearchCtx<'a> {
    fn new(ds: &GlobalDataset, counts: &'a [usize], opts: &'a PcorOptions) -> Result<Self> {
        validate_counts(counts, ds.n_features())?;
        let corr = GlobalCorr::from_dataset(ds, opts.kind)?;
        Self::from_corr(corr, counts, opts)
    }

    fn from_corr(corr: GlobalCorr, counts: &'a [usize], opts: &'a PcorOptions) -> Result<Self> {
        validate_counts(counts, corr.n_features())?;
        opts.validate()?;
        let mut party_of_position = Vec::with_capacity(corr.n_features());
        for (party, &size) in counts.iter().enumerate() {
            party_of_position.extend(std::iter::repeat(party as u32).take(size));
        }
        Ok(SearchCtx {
            corr,
            counts,
            opts,
            party_of_position,
            memo: Mutex::new(HashMap::new()),
        })
    }

    fn n_features(&self) -> usize {
        self.party_of_position.len()
    }

    fn assignment_of(&self, perm: &[usize]) -> Vec<u32> {
        let mut assignment = vec![0u32; perm.len()];
        for (pos, &feature) in perm.iter().enumerate() {
            assignment[feature] = self.party_of_position[pos];
        }
        assignment
    }

    fn icor_of_perm(&self, perm: &[usize]) -> f64 {
        let assignment = self.assignment_of(perm);
        if let Some(&v) = self.memo.lock().unwrap().get(&assignment) {
            return v;
        }
        let mut parties = vec![Vec::new(); self.counts.len()];
        for (feature, &p) in assignment.iter().enumerate() {
            parties[p as usize].push(feature);
        }
        let v = self
            .corr
            .icor_of_parties(&parties, self.opts)
            .expect("validated counts imply non-empty parties");
        self.memo.lock().unwrap().insert(assignment, v);
        v
    }

    /// First-improvement descent over cross-party position swaps. Permutation
    /// search lands near an optimum fast; single swaps then fix the last few
    /// misplaced columns much cheaper than more generations would.
    fn swap_descent<G: Fn(f64) -> f64>(&self, perm: &mut Vec<usize>, objective: G) -> f64 {
        let m = self.n_features();
        let mut best = objective(self.icor_of_perm(perm));
        for _ in 0..MAX_DESCENT_PASSES {
            let mut improved = false;
            for a in 0..m {
                for b in (a + 1)..m {
                    if self.party_of_position[a] == self.party_of_position[b] {
                        continue;
                    }
                    perm.swap(a, b);
                    let v = objective(self.icor_of_perm(perm));
                    if v + DESCENT_EPSILON < best {
                        best = v;
                        improved = true;
                    } else {
                        perm.swap(a, b);
                    }
                }
            }
            if !improved {
                break;
            }
        }
        best
    }

    fn run_extreme(
        &self,
        direction: ExtremeDirection,
        cfg: &BrkgaConfig,
        stream: u64,
    ) -> Result<ExtremeOutcome> {
        let sign = match direction {
            ExtremeDirection::Min => 1.0,
            ExtremeDirection::Max => -1.0,
        };
        let out = minimize_permutation(self.n_features(), cfg, stream, &[], None, |perm| {
            sign * self.icor_of_perm(perm)
        })?;
        let mut perm = out.best_permutation;
        self.swap_descent(&mut perm, |f| sign * f);
        let value = self.icor_of_perm(&perm);
        Ok(ExtremeOutcome {
            genome: PermutationGenome::from_permutation(&perm),
            perm,
            value,
            generations: out.generations,
        })
    }
}

struct ExtremeOutcome {
    perm: Vec<usize>,
    genome: PermutationGenome,
    value: f64,
    generations: usize,
}

/// Extreme achievable scores for a prebuilt correlation matrix, sharing one
/// search context (and score memo) between the two directions.
pub(crate) fn extreme_bounds_from_corr(
    corr: GlobalCorr,
    counts: &[usize],
    cfg: &BrkgaConfig,
    opts: &PcorOptions,
) -> Result<(f64, f64)> {
    let ctx = SearchCtx::from_corr(corr, counts, opts)?;
    let low = ctx.run_extreme(ExtremeDirection::Min, cfg, 0)?;
    let high = ctx.run_extreme(ExtremeDirection::Max, cfg, 1)?;
    Ok((low.value.min(high.value), low.value.max(high.value)))
}

/// Score range observed over `shuffles` uniformly random permutations; a
/// cheap bracket when the full search is too expensive.
pub(crate) fn shuffle_bounds_from_corr(
    corr: GlobalCorr,
    counts: &[usize],
    shuffles: usize,
    seed: u64,
    opts: &PcorOptions,
) -> Result<(f64, f64)> {
    use rand::Rng;
    use rand::SeedableRng;
    if shuffles == 0 {
        return Err(Error::InvalidParam("need at least one shuffle".into()));
    }
    let ctx = SearchCtx::from_corr(corr, counts, opts)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let m = ctx.n_features();
    let mut perm: Vec<usize> = (0..m).collect();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for _ in 0..shuffles {
        for i in (1..m).rev() {
            perm.swap(i, rng.gen_range(0..=i));
        }
        let v = ctx.icor_of_perm(&perm);
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok((lo, hi))
}

/// Best-effort minimum or maximum achievable inter-party correlation under
/// the given party sizes. Returns the best permutation found and its score;
/// deterministic given `cfg.seed`.
pub fn optimize_extreme(
    ds: &GlobalDataset,
    counts: &[usize],
    direction: ExtremeDirection,
    cfg: &BrkgaConfig,
    opts: &PcorOptions,
) -> Result<(Vec<usize>, f64)> {
    let ctx = SearchCtx::new(ds, counts, opts)?;
    let stream = match direction {
        ExtremeDirection::Min => 0,
        ExtremeDirection::Max => 1,
    };
    let out = ctx.run_extreme(direction, cfg, stream)?;
    Ok((out.perm, out.value))
}

/// Splits features so the resulting inter-party correlation lands close to
/// the level selected by `beta`: 0 targets the achievable minimum, 1 the
/// maximum, values between interpolate linearly.
///
/// Both bound searches, the target search, and every reported score share one
/// correlation matrix and one `PcorOptions`, so any truncation error cancels
/// between the interpolation endpoints and the target.
pub fn split_by_correlation(
    ds: &GlobalDataset,
    beta: f64,
    counts: &[usize],
    cfg: &BrkgaConfig,
    opts: &PcorOptions,
) -> Result<CorrSplitResult> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::InvalidParam(format!(
            "beta must lie in [0, 1], got {beta}"
        )));
    }
    let ctx = SearchCtx::new(ds, counts, opts)?;
    let low = ctx.run_extreme(ExtremeDirection::Min, cfg, 0)?;
    let high = ctx.run_extreme(ExtremeDirection::Max, cfg, 1)?;
    // The searches are heuristic; order the bounds by value, not by intent.
    let (icor_min, icor_max) = if low.value <= high.value {
        (low.value, high.value)
    } else {
        (high.value, low.value)
    };
    let icor_target = ((1.0 - beta) * icor_min + beta * icor_max).clamp(icor_min, icor_max);

    // The bound permutations seed the target search: at beta 0 or 1 they are
    // already exact, and in between they bracket the target.
    let warm = [low.genome, high.genome];
    let out = minimize_permutation(
        ctx.n_features(),
        cfg,
        2,
        &warm,
        Some(cfg.target_tolerance),
        |perm| (ctx.icor_of_perm(perm) - icor_target).abs(),
    )?;
    let mut perm = out.best_permutation;
    if out.best_value > cfg.target_tolerance {
        ctx.swap_descent(&mut perm, |f| (f - icor_target).abs());
    }
    let icor_achieved = ctx.icor_of_perm(&perm);
    let partition = partition_from_permutation(&perm, counts)?;
    Ok(CorrSplitResult {
        partition,
        icor_achieved,
        icor_min,
        icor_max,
        icor_target,
        gap: (icor_achieved - icor_target).abs(),
        generations_used: low.generations + high.generations + out.generations,
    })
}
