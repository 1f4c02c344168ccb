//! Dirichlet-weighted random feature allocation.
//!
//! One probability vector r is drawn per split from Dirichlet(alpha); each
//! feature then independently goes to party k with probability r_k. Larger
//! alpha_k gives party k a proportionally larger expected share; a smaller
//! overall concentration makes shares more lopsided across seeds.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::dataset::PartyPartition;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirichletSpec {
    /// One positive concentration per party.
    pub alphas: Vec<f64>,
    /// Pre-assign each party one uniformly chosen feature so no party ends up
    /// empty. Requires at least as many features as parties.
    pub guard_nonempty: bool,
    pub seed: u64,
}

impl DirichletSpec {
    pub fn new(alphas: Vec<f64>, seed: u64) -> Self {
        DirichletSpec {
            alphas,
            guard_nonempty: true,
            seed,
        }
    }

    pub fn symmetric(alpha: f64, parties: usize, seed: u64) -> Self {
        DirichletSpec::new(vec![alpha; parties], seed)
    }

    pub fn num_parties(&self) -> usize {
        self.alphas.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.alphas.is_empty() {
            return Err(Error::InvalidParam("alphas must be non-empty".into()));
        }
        if let Some(&a) = self.alphas.iter().find(|&&a| !(a > 0.0) || !a.is_finite()) {
            return Err(Error::InvalidParam(format!(
                "alpha entries must be positive and finite, got {a}"
            )));
        }
        Ok(())
    }
}

/// One draw from Dirichlet(alphas): independent gamma variates, renormalized.
/// Deterministic given the rng state.
pub fn sample_dirichlet<R: Rng + ?Sized>(alphas: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    if alphas.is_empty() {
        return Err(Error::InvalidParam("alphas must be non-empty".into()));
    }
    let gammas: Vec<Gamma<f64>> = alphas
        .iter()
        .map(|&a| {
            Gamma::new(a, 1.0)
                .map_err(|e| Error::InvalidParam(format!("alpha {a} is not a valid shape: {e}")))
        })
        .collect::<Result<_>>()?;
    // All-zero draws are possible only when tiny shapes underflow; retry with
    // fresh variates rather than inventing a direction.
    for _ in 0..16 {
        let draws: Vec<f64> = gammas.iter().map(|g| g.sample(rng)).collect();
        let sum: f64 = draws.iter().sum();
        if sum > 0.0 {
            return Ok(draws.into_iter().map(|x| x / sum).collect());
        }
    }
    Err(Error::InvalidParam(
        "gamma variates underflowed to zero repeatedly; alphas too small".into(),
    ))
}

fn pick_party(cumulative: &[f64], u: f64) -> u32 {
    for (k, &c) in cumulative.iter().enumerate() {
        if u < c {
            return k as u32;
        }
    }
    (cumulative.len() - 1) as u32
}

/// Allocates `n_features` features to `spec.alphas.len()` parties.
///
/// Draw order is fixed: the Dirichlet vector first, then the guard's K
/// distinct uniform picks (when enabled), then one uniform variate per
/// remaining feature in ascending index order. Fixed order makes every
/// assignment a pure function of the seed.
pub fn split_by_importance(n_features: usize, spec: &DirichletSpec) -> Result<PartyPartition> {
    spec.validate()?;
    let k = spec.num_parties();
    if spec.guard_nonempty && n_features < k {
        return Err(Error::InvalidParam(format!(
            "non-empty guard needs at least {k} features, dataset has {n_features}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let r = sample_dirichlet(&spec.alphas, &mut rng)?;
    let mut cumulative = r.clone();
    for i in 1..cumulative.len() {
        cumulative[i] += cumulative[i - 1];
    }

    let mut assignment = vec![0u32; n_features];
    let mut fixed = vec![false; n_features];
    if spec.guard_nonempty {
        // Partial Fisher-Yates: the first k slots end up as k distinct
        // uniformly chosen features, one per party.
        let mut pool: Vec<usize> = (0..n_features).collect();
        for p in 0..k {
            let i = rng.gen_range(p..n_features);
            pool.swap(p, i);
            assignment[pool[p]] = p as u32;
            fixed[pool[p]] = true;
        }
    }
    for j in 0..n_features {
        if fixed[j] {
            continue;
        }
        assignment[j] = pick_party(&cumulative, rng.gen::<f64>());
    }
    PartyPartition::new(assignment, k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_party_takes_everything() {
        let spec = DirichletSpec::new(vec![2.5], 9);
        let part = split_by_importance(12, &spec).unwrap();
        assert!(part.assignment().iter().all(|&p| p == 0));
    }

    #[test]
    fn dirichlet_single_point_simplex() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(sample_dirichlet(&[3.0], &mut rng).unwrap(), vec![1.0]);
    }

    #[test]
    fn dirichlet_rejects_bad_alpha() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(sample_dirichlet(&[1.0, 0.0], &mut rng).is_err());
        assert!(sample_dirichlet(&[1.0, -2.0], &mut rng).is_err());
        assert!(sample_dirichlet(&[], &mut rng).is_err());
    }

    #[test]
    fn dirichlet_draws_live_on_the_simplex() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let r = sample_dirichlet(&[0.1, 1.0, 4.0], &mut rng).unwrap();
            assert!(r.iter().all(|&x| (0.0..=1.0).contains(&x)));
            assert!((r.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn dirichlet_symmetric_mean_is_half() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut total = 0.0;
        let draws = 100_000;
        for _ in 0..draws {
            total += sample_dirichlet(&[1.0, 1.0], &mut rng).unwrap()[0];
        }
        let mean = total / draws as f64;
        assert!((mean - 0.5).abs() <= 0.01, "mean {mean}");
    }

    #[test]
    fn dirichlet_mean_tracks_alpha_proportions() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut totals = [0.0; 3];
        let draws = 100_000;
        for _ in 0..draws {
            let r = sample_dirichlet(&[1.0, 2.0, 7.0], &mut rng).unwrap();
            for (t, x) in totals.iter_mut().zip(&r) {
                *t += x;
            }
        }
        for (t, want) in totals.iter().zip([0.1, 0.2, 0.7]) {
            let mean = t / draws as f64;
            assert!((mean - want).abs() <= 0.01, "mean {mean} vs {want}");
        }
    }

    #[test]
    fn fixed_seed_reproduces_assignment() {
        let spec = DirichletSpec::new(vec![1.0, 2.0, 3.0], 77);
        let a = split_by_importance(100, &spec).unwrap();
        let b = split_by_importance(100, &spec).unwrap();
        assert_eq!(a, b);
        let other = DirichletSpec::new(vec![1.0, 2.0, 3.0], 78);
        let c = split_by_importance(100, &other).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn guard_saturated_when_features_equal_parties() {
        let spec = DirichletSpec::new(vec![1.0; 4], 3);
        let part = split_by_importance(4, &spec).unwrap();
        assert_eq!(part.party_sizes(), vec![1, 1, 1, 1]);
    }

    #[test]
    fn guard_requires_enough_features() {
        let spec = DirichletSpec::new(vec![1.0; 5], 0);
        assert!(split_by_importance(4, &spec).is_err());
        let mut unguarded = spec;
        unguarded.guard_nonempty = false;
        assert!(split_by_importance(4, &unguarded).is_ok());
    }

    #[test]
    fn guarded_splits_never_leave_a_party_empty() {
        for seed in 0..200 {
            // Lopsided concentrations make empty parties likely without the guard.
            let spec = DirichletSpec::new(vec![0.05, 0.05, 5.0], seed);
            let part = split_by_importance(6, &spec).unwrap();
            part.require_nonempty_parties().unwrap();
        }
    }

    #[test]
    fn symmetric_shares_are_balanced_on_average() {
        let m = 1000;
        let mut share = 0.0;
        for seed in 0..200 {
            let spec = DirichletSpec::new(vec![1.0, 1.0], seed);
            let part = split_by_importance(m, &spec).unwrap();
            share += part.party_sizes()[0] as f64 / m as f64;
        }
        share /= 200.0;
        assert!((0.48..=0.52).contains(&share), "mean share {share}");
    }
}
