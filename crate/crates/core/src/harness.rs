//! Procedurally generated fixtures and self-check suites.
//!
//! Everything here is reproducible from seeds; the binary ships no data
//! files. The suites double as executable documentation of the properties
//! the splitting machinery guarantees.

use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::corr::{self, CorrelationKind, GlobalCorr, PcorOptions};
use crate::dataset::{GlobalDataset, PartyPartition};
use crate::error::{Error, Result};
use crate::eval::{estimate_beta, symmetric_dirichlet_variance};
use crate::split::{
    equal_counts, optimize_extreme, split_by_correlation, split_by_importance, BrkgaConfig,
    DirichletSpec, ExtremeDirection,
};

/// Two groups of mutually redundant columns with exactly zero correlation
/// across groups. The bases (1,2,3,4) and (2,4,1,3) are chosen so that the
/// standardized cross products cancel in pairs even in floating point, and
/// each copy applies a power-of-two scale plus an integer offset, which keeps
/// every standardized column of a block bit-identical to its base. Columns
/// 0..copies are block 0, the rest block 1.
pub fn two_block_dataset(copies_per_block: usize) -> GlobalDataset {
    assert!(copies_per_block >= 1);
    let bases = [[1.0, 2.0, 3.0, 4.0], [2.0, 4.0, 1.0, 3.0]];
    let scales = [1.0, 2.0, 0.5, 4.0, 0.25];
    let m = copies_per_block;
    let mut data = Array2::zeros((4, 2 * m));
    for (block, base) in bases.iter().enumerate() {
        for c in 0..m {
            let s = scales[c % scales.len()];
            let t = c as f64;
            for r in 0..4 {
                data[[r, block * m + c]] = s * base[r] + t;
            }
        }
    }
    GlobalDataset::from_dense(data, None).expect("fixture construction is infallible")
}

/// Columns driven by one latent factor per block plus independent noise,
/// then shuffled. Returns the dataset and each column's original block id.
pub fn correlated_blocks_dataset(
    n_samples: usize,
    block_sizes: &[usize],
    noise: f64,
    seed: u64,
) -> (GlobalDataset, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cols: Vec<(usize, Vec<f64>)> = Vec::new();
    for (b, &size) in block_sizes.iter().enumerate() {
        let factor: Vec<f64> = (0..n_samples)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        for _ in 0..size {
            let col = factor
                .iter()
                .map(|&z| z + noise * rng.sample::<f64, _>(StandardNormal))
                .collect();
            cols.push((b, col));
        }
    }
    for i in (1..cols.len()).rev() {
        let j = rng.gen_range(0..=i);
        cols.swap(i, j);
    }
    let blocks: Vec<usize> = cols.iter().map(|(b, _)| *b).collect();
    let data = Array2::from_shape_fn((n_samples, cols.len()), |(r, c)| cols[c].1[r]);
    let ds = GlobalDataset::from_dense(data, None).expect("fixture construction is infallible");
    (ds, blocks)
}

/// Columns mixed from `rank` latent factors whose weights shrink
/// geometrically, so the correlation spectrum decays smoothly. Useful for
/// exercising truncated decompositions at different ranks.
pub fn latent_factor_dataset(
    n_samples: usize,
    n_features: usize,
    rank: usize,
    decay: f64,
    noise: f64,
    seed: u64,
) -> GlobalDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let factors =
        Array2::from_shape_fn((n_samples, rank), |_| rng.sample::<f64, _>(StandardNormal));
    let weights = Array2::from_shape_fn((rank, n_features), |(f, _)| {
        decay.powi(f as i32) * rng.sample::<f64, _>(StandardNormal)
    });
    let mut data = factors.dot(&weights);
    for v in data.iter_mut() {
        *v += noise * rng.sample::<f64, _>(StandardNormal);
    }
    GlobalDataset::from_dense(data, None).expect("fixture construction is infallible")
}

/// Unstructured noise dataset.
pub fn random_dataset(n_samples: usize, n_features: usize, seed: u64) -> GlobalDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data =
        Array2::from_shape_fn((n_samples, n_features), |_| rng.sample::<f64, _>(StandardNormal));
    GlobalDataset::from_dense(data, None).expect("fixture construction is infallible")
}

/// All two-party partitions with the given party-0 size, with feature 0
/// pinned to party 0 so each unordered split appears exactly once.
pub fn enumerate_bipartitions(n_features: usize, party0_size: usize) -> Vec<PartyPartition> {
    assert!(party0_size >= 1 && party0_size < n_features);
    let mut out = Vec::new();
    let mut chosen: Vec<usize> = Vec::with_capacity(party0_size - 1);
    fn recurse(
        next: usize,
        left: usize,
        n: usize,
        chosen: &mut Vec<usize>,
        out: &mut Vec<PartyPartition>,
    ) {
        if left == 0 {
            let mut assignment = vec![1u32; n];
            assignment[0] = 0;
            for &j in chosen.iter() {
                assignment[j] = 0;
            }
            out.push(PartyPartition::new(assignment, 2).expect("assignment is well-formed"));
            return;
        }
        for j in next..=(n - left) {
            chosen.push(j);
            recurse(j + 1, left - 1, n, chosen, out);
            chosen.pop();
        }
    }
    recurse(1, party0_size - 1, n_features, &mut chosen, &mut out);
    out
}

/// Inter-party correlation of every given partition against one shared
/// correlation matrix.
pub fn icor_landscape(
    ds: &GlobalDataset,
    partitions: &[PartyPartition],
    opts: &PcorOptions,
) -> Result<Vec<f64>> {
    let gc = GlobalCorr::from_dataset(ds, opts.kind)?;
    partitions
        .iter()
        .map(|p| gc.icor_of_parties(&p.all_party_columns(), opts))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub details: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub passed: bool,
    pub checks: Vec<CheckReport>,
}

impl SuiteReport {
    fn new(suite: &str) -> Self {
        SuiteReport {
            suite: suite.into(),
            passed: true,
            checks: Vec::new(),
        }
    }

    fn push(&mut self, name: &str, passed: bool, details: String) {
        self.passed &= passed;
        self.checks.push(CheckReport {
            name: name.into(),
            passed,
            details,
        });
    }
}

pub const SUITE_NAMES: &[&str] = &[
    "icor-bounds",
    "dirichlet-proportions",
    "corr-equivalence",
    "beta-round-trip",
];

pub fn run_suite(name: &str) -> Result<SuiteReport> {
    match name {
        "icor-bounds" => suite_icor_bounds(),
        "dirichlet-proportions" => suite_dirichlet_proportions(),
        "corr-equivalence" => suite_corr_equivalence(),
        "beta-round-trip" => suite_beta_round_trip(),
        other => Err(Error::InvalidParam(format!(
            "unknown suite '{other}' (available: {})",
            SUITE_NAMES.join(", ")
        ))),
    }
}

pub fn run_all_suites() -> Result<Vec<SuiteReport>> {
    SUITE_NAMES.iter().map(|s| run_suite(s)).collect()
}

/// Exhaustive check of the score landscape on the 8-column two-block fixture:
/// the block split is the unique minimum at -1, splits taking half of each
/// block are the maximum at 0, nothing is positive, and the genetic search
/// reproduces both enumerated extremes.
fn suite_icor_bounds() -> Result<SuiteReport> {
    let mut report = SuiteReport::new("icor-bounds");
    let copies = 4usize;
    let ds = two_block_dataset(copies);
    let m = 2 * copies;
    let opts = PcorOptions::default();
    let partitions = enumerate_bipartitions(m, copies);
    let landscape = icor_landscape(&ds, &partitions, &opts)?;

    let (argmin, &min) = landscape
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("landscape is non-empty");
    let (_, &max) = landscape
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("landscape is non-empty");

    let block_assignment: Vec<u32> = (0..m).map(|j| (j >= copies) as u32).collect();
    let min_is_block = partitions[argmin].assignment() == block_assignment.as_slice();
    let runner_up = landscape
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != argmin)
        .map(|(_, &v)| v)
        .fold(f64::INFINITY, f64::min);
    report.push(
        "block-split-is-unique-min",
        min_is_block && (min + 1.0).abs() <= 1e-9 && runner_up > min + 1e-9,
        format!("min={min:.12} runner_up={runner_up:.12} at_block_split={min_is_block}"),
    );

    // A maximizer must take exactly half of block 0 (and so half of block 1).
    let balanced: Vec<bool> = partitions
        .iter()
        .map(|p| {
            let u = p.party_columns(0).iter().filter(|&&j| j < copies).count();
            u == copies / 2
        })
        .collect();
    let max_only_at_balanced = landscape
        .iter()
        .zip(&balanced)
        .all(|(&v, &bal)| bal == ((v - max).abs() <= 1e-9));
    report.push(
        "balanced-interleaving-is-max",
        max_only_at_balanced && max.abs() <= 1e-9,
        format!("max={max:.12} balanced_splits={}", balanced.iter().filter(|&&b| b).count()),
    );

    report.push(
        "all-nonpositive",
        landscape.iter().all(|&v| v <= 1e-9),
        format!("landscape_size={}", landscape.len()),
    );

    let counts = equal_counts(m, 2)?;
    let cfg = BrkgaConfig::default();
    let (_, search_min) = optimize_extreme(&ds, &counts, ExtremeDirection::Min, &cfg, &opts)?;
    let (_, search_max) = optimize_extreme(&ds, &counts, ExtremeDirection::Max, &cfg, &opts)?;
    report.push(
        "search-matches-enumeration",
        (search_min - min).abs() <= 1e-6 && (search_max - max).abs() <= 1e-6,
        format!(
            "enumerated=[{min:.9}, {max:.9}] search=[{search_min:.9}, {search_max:.9}]"
        ),
    );
    Ok(report)
}

/// Statistical check that importance-driven splitting hands each party a
/// feature share matching its concentration weight, and that larger symmetric
/// concentrations shrink the share spread.
fn suite_dirichlet_proportions() -> Result<SuiteReport> {
    let mut report = SuiteReport::new("dirichlet-proportions");
    let m = 1000usize;
    let seeds = 200u64;

    let alphas = vec![1.0, 2.0, 7.0];
    let expected = [0.1, 0.2, 0.7];
    let mut mean_share = [0.0f64; 3];
    for seed in 0..seeds {
        let spec = DirichletSpec::new(alphas.clone(), seed);
        let part = split_by_importance(m, &spec)?;
        for (k, &size) in part.party_sizes().iter().enumerate() {
            mean_share[k] += size as f64 / m as f64 / seeds as f64;
        }
    }
    let worst = mean_share
        .iter()
        .zip(expected)
        .map(|(&got, want)| (got - want).abs())
        .fold(0.0, f64::max);
    report.push(
        "shares-track-concentration",
        worst <= 0.02,
        format!(
            "mean_shares=[{:.4}, {:.4}, {:.4}] expected=[0.1, 0.2, 0.7]",
            mean_share[0], mean_share[1], mean_share[2]
        ),
    );

    let k = 3usize;
    let mut spreads = Vec::new();
    for &alpha in &[0.1, 1.0, 10.0, 100.0] {
        let mut sq = 0.0f64;
        for seed in 0..seeds {
            let spec = DirichletSpec::symmetric(alpha, k, seed);
            let part = split_by_importance(m, &spec)?;
            for &size in &part.party_sizes() {
                let share = size as f64 / m as f64;
                sq += (share - 1.0 / k as f64).powi(2);
            }
        }
        spreads.push((sq / (seeds as f64 * k as f64)).sqrt());
    }
    let decreasing = spreads.windows(2).all(|w| w[1] < w[0]);
    let theoretical: Vec<f64> = [0.1, 1.0, 10.0, 100.0]
        .iter()
        .map(|&a| symmetric_dirichlet_variance(k, a).sqrt())
        .collect();
    report.push(
        "spread-shrinks-with-concentration",
        decreasing,
        format!("measured={spreads:.4?} theoretical={theoretical:.4?}"),
    );
    Ok(report)
}

/// Pair metric cross-checks: the pair score of a group against itself equals
/// the eigenvalue-based coefficient, and scores of arbitrary pairs stay in
/// [0, 1].
fn suite_corr_equivalence() -> Result<SuiteReport> {
    let mut report = SuiteReport::new("corr-equivalence");
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let opts_for = |kind| PcorOptions {
        kind,
        ..PcorOptions::default()
    };

    let mut worst = 0.0f64;
    for round in 0..100 {
        let n = rng.gen_range(20..=200);
        let m = rng.gen_range(2..=16);
        let ds = random_dataset(n, m, 1000 + round);
        let x = ds.to_dense();
        for kind in [CorrelationKind::Pearson, CorrelationKind::Spearman] {
            let p = corr::pcor(x.view(), x.view(), &opts_for(kind))?;
            let e = corr::mcor(x.view(), kind)?;
            worst = worst.max((p - e).abs());
        }
    }
    report.push(
        "self-pair-equals-eigen-coefficient",
        worst <= 1e-9,
        format!("worst_abs_diff={worst:.3e} over 100 matrices x 2 kinds"),
    );

    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut in_range = true;
    for round in 0..300 {
        let n = rng.gen_range(5..=60);
        let a = random_dataset(n, rng.gen_range(1..=12), 5000 + round);
        let b = random_dataset(n, rng.gen_range(1..=12), 9000 + round);
        let kind = if round % 2 == 0 {
            CorrelationKind::Pearson
        } else {
            CorrelationKind::Spearman
        };
        let p = corr::pcor(a.to_dense().view(), b.to_dense().view(), &opts_for(kind))?;
        lo = lo.min(p);
        hi = hi.max(p);
        in_range &= (0.0..=1.0).contains(&p);
    }
    report.push(
        "pair-score-stays-in-unit-interval",
        in_range,
        format!("observed_range=[{lo:.6}, {hi:.6}] over 300 pairs"),
    );
    Ok(report)
}

/// Round trip: split at a requested interpolation coefficient, then re-infer
/// it from the produced partition.
fn suite_beta_round_trip() -> Result<SuiteReport> {
    let mut report = SuiteReport::new("beta-round-trip");
    let (ds, _) = correlated_blocks_dataset(80, &[4, 4, 4], 0.5, 21);
    let counts = equal_counts(ds.n_features(), 3)?;
    let opts = PcorOptions::default();
    let cfg = BrkgaConfig {
        population_size: 50,
        max_generations: 80,
        stall_generations: 15,
        ..BrkgaConfig::default()
    };
    let mut worst = 0.0f64;
    let mut details = Vec::new();
    for &beta in &[0.0, 0.5, 1.0] {
        let split = split_by_correlation(&ds, beta, &counts, &cfg, &opts)?;
        let est = estimate_beta(&ds, &split.partition, &cfg, &opts)?;
        worst = worst.max((est.beta - beta).abs());
        details.push(format!("{beta}->{:.3}", est.beta));
    }
    report.push(
        "recovers-requested-coefficient",
        worst <= 0.15,
        format!("requested->estimated: {} worst_abs_err={worst:.4}", details.join(", ")),
    );
    Ok(report)
}
