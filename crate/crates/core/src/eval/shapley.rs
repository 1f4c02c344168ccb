//! Shapley attribution of predictive value to parties.

use std::collections::HashMap;
use std::sync::Mutex;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coalition value of a party subset. Implementations must be deterministic
/// (seed any internal randomness at construction) and should anchor the empty
/// set at 0 so reported values read as gains over no data at all.
pub trait CharacteristicFn: Sync {
    /// `subset` is strictly ascending party indices.
    fn value(&self, subset: &[usize]) -> Result<f64>;
}

impl<F> CharacteristicFn for F
where
    F: Fn(&[usize]) -> Result<f64> + Sync,
{
    fn value(&self, subset: &[usize]) -> Result<f64> {
        self(subset)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapleyMethod {
    ExactEnumeration,
    MonteCarlo,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShapleyEstimate {
    pub per_party: Vec<f64>,
    pub method: ShapleyMethod,
    /// Subset evaluations (enumeration) or sampled permutations (Monte Carlo).
    pub samples: usize,
    /// Per-party standard errors; zero under enumeration.
    pub stderr: Vec<f64>,
}

/// Cutoff below which all 2^K subsets are evaluated instead of sampling.
pub const EXACT_ENUMERATION_MAX_PARTIES: usize = 10;

/// Shapley values of all parties under the given coalition value function.
///
/// Exact enumeration for up to 10 parties (1024 evaluations, no sampling
/// noise); Monte-Carlo permutation sampling with `budget` permutations above
/// that. Deterministic per seed either way.
pub fn party_shapley(
    num_parties: usize,
    cf: &dyn CharacteristicFn,
    budget: usize,
    seed: u64,
) -> Result<ShapleyEstimate> {
    if num_parties == 0 {
        return Err(Error::InvalidParam("no parties to evaluate".into()));
    }
    if num_parties <= EXACT_ENUMERATION_MAX_PARTIES {
        shapley_exact(num_parties, cf)
    } else {
        shapley_monte_carlo(num_parties, cf, budget, seed)
    }
}

fn subset_of_mask(mask: u32) -> Vec<usize> {
    (0..32).filter(|i| mask & (1 << i) != 0).collect()
}

fn eval_subset(cf: &dyn CharacteristicFn, subset: &[usize]) -> Result<f64> {
    cf.value(subset).map_err(|e| match e {
        err @ Error::CharacteristicFn { .. } => err,
        other => Error::CharacteristicFn {
            subset: subset.to_vec(),
            message: other.to_string(),
        },
    })
}

/// Exact Shapley by subset enumeration: every subset value is computed once,
/// then each party's value is the combinatorially weighted sum of its
/// marginal contributions.
pub fn shapley_exact(num_parties: usize, cf: &dyn CharacteristicFn) -> Result<ShapleyEstimate> {
    if num_parties > EXACT_ENUMERATION_MAX_PARTIES {
        return Err(Error::InvalidParam(format!(
            "enumeration over {num_parties} parties would need 2^{num_parties} evaluations"
        )));
    }
    let k = num_parties;
    let total = 1u32 << k;
    let values: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|mask| eval_subset(cf, &subset_of_mask(mask)))
        .collect::<Result<_>>()?;

    // weight[s] = s! (k-s-1)! / k!, the probability that a fixed party
    // arrives right after a given s-subset in a uniform random order.
    let factorial = |n: usize| (1..=n).map(|x| x as f64).product::<f64>();
    let weights: Vec<f64> = (0..k)
        .map(|s| factorial(s) * factorial(k - s - 1) / factorial(k))
        .collect();

    let mut per_party = vec![0.0; k];
    for mask in 0..total {
        let s = mask.count_ones() as usize;
        for i in 0..k {
            if mask & (1 << i) != 0 {
                continue;
            }
            let with = mask | (1 << i);
            per_party[i] += weights[s] * (values[with as usize] - values[mask as usize]);
        }
    }
    Ok(ShapleyEstimate {
        per_party,
        method: ShapleyMethod::ExactEnumeration,
        samples: total as usize,
        stderr: vec![0.0; k],
    })
}

/// Monte-Carlo Shapley: sample uniform party orderings, credit each party its
/// marginal contribution over the parties before it. Samples are generated
/// from per-index streams and reduced in index order, so the estimate does
/// not depend on thread count.
pub fn shapley_monte_carlo(
    num_parties: usize,
    cf: &dyn CharacteristicFn,
    budget: usize,
    seed: u64,
) -> Result<ShapleyEstimate> {
    if num_parties == 0 {
        return Err(Error::InvalidParam("no parties to evaluate".into()));
    }
    if budget == 0 {
        return Err(Error::InvalidParam("sampling budget must be positive".into()));
    }
    if num_parties > 64 {
        return Err(Error::InvalidParam(
            "more than 64 parties is not supported".into(),
        ));
    }
    let k = num_parties;
    let cache: Mutex<HashMap<u64, f64>> = Mutex::new(HashMap::new());
    let cached_value = |members: &mut Vec<usize>| -> Result<f64> {
        members.sort_unstable();
        let mask = members.iter().fold(0u64, |m, &i| m | (1 << i));
        if let Some(&v) = cache.lock().unwrap().get(&mask) {
            return Ok(v);
        }
        let v = eval_subset(cf, members)?;
        cache.lock().unwrap().insert(mask, v);
        Ok(v)
    };

    let samples: Vec<Vec<f64>> = (0..budget)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(s as u64);
            let mut order: Vec<usize> = (0..k).collect();
            for i in (1..k).rev() {
                order.swap(i, rng.gen_range(0..=i));
            }
            let mut marginals = vec![0.0; k];
            let mut prefix: Vec<usize> = Vec::with_capacity(k);
            let mut prev = cached_value(&mut Vec::new())?;
            for &party in &order {
                prefix.push(party);
                let mut members = prefix.clone();
                let cur = cached_value(&mut members)?;
                marginals[party] = cur - prev;
                prev = cur;
            }
            Ok(marginals)
        })
        .collect::<Result<_>>()?;

    let n = budget as f64;
    let mut per_party = vec![0.0; k];
    for sample in &samples {
        for (acc, &v) in per_party.iter_mut().zip(sample) {
            *acc += v;
        }
    }
    for acc in &mut per_party {
        *acc /= n;
    }
    let mut stderr = vec![0.0; k];
    if budget > 1 {
        for i in 0..k {
            let var = samples
                .iter()
                .map(|s| (s[i] - per_party[i]).powi(2))
                .sum::<f64>()
                / (n - 1.0);
            stderr[i] = (var / n).sqrt();
        }
    }
    Ok(ShapleyEstimate {
        per_party,
        method: ShapleyMethod::MonteCarlo,
        samples: budget,
        stderr,
    })
}
