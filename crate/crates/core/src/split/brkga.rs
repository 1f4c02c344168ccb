//! Biased random-key genetic algorithm over permutations.
//!
//! Genomes are real key vectors in [0,1); decoding is a stable argsort, so
//! every genome maps to a valid permutation and nearby key vectors map to
//! nearby permutations. Evolution keeps the elite slice verbatim, injects
//! random mutants, and fills the rest with biased crossover that inherits
//! each key from the elite parent with a fixed probability.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BrkgaConfig {
    pub population_size: usize,
    /// Fraction of the population copied unchanged into the next generation.
    pub elite_fraction: f64,
    /// Fraction replaced by fresh random genomes each generation.
    pub mutant_fraction: f64,
    /// Probability that an offspring key comes from the elite parent.
    pub elite_inherit_bias: f64,
    pub max_generations: usize,
    /// Stop after this many generations without improvement of the best value.
    pub stall_generations: usize,
    /// The target search stops once |f - f*| falls to this level.
    pub target_tolerance: f64,
    pub seed: u64,
}

impl Default for BrkgaConfig {
    fn default() -> Self {
        BrkgaConfig {
            population_size: 100,
            elite_fraction: 0.2,
            mutant_fraction: 0.15,
            elite_inherit_bias: 0.7,
            max_generations: 200,
            stall_generations: 30,
            target_tolerance: 1e-3,
            seed: 0,
        }
    }
}

impl BrkgaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(Error::InvalidParam(
                "population_size must be at least 2".into(),
            ));
        }
        if !(self.elite_fraction > 0.0) || !(self.mutant_fraction >= 0.0) {
            return Err(Error::InvalidParam(
                "elite_fraction must be positive and mutant_fraction non-negative".into(),
            ));
        }
        if self.elite_fraction + self.mutant_fraction >= 1.0 {
            return Err(Error::InvalidParam(
                "elite_fraction + mutant_fraction must stay below 1".into(),
            ));
        }
        if !(0.5..=1.0).contains(&self.elite_inherit_bias) {
            return Err(Error::InvalidParam(
                "elite_inherit_bias must lie in [0.5, 1]".into(),
            ));
        }
        if self.max_generations == 0 || self.stall_generations == 0 {
            return Err(Error::InvalidParam(
                "max_generations and stall_generations must be at least 1".into(),
            ));
        }
        if !(self.target_tolerance >= 0.0) {
            return Err(Error::InvalidParam(
                "target_tolerance must be non-negative".into(),
            ));
        }
        Ok(())
    }

    fn elite_count(&self) -> usize {
        let e = (self.population_size as f64 * self.elite_fraction).ceil() as usize;
        e.clamp(1, self.population_size - 1)
    }

    fn mutant_count(&self) -> usize {
        let m = (self.population_size as f64 * self.mutant_fraction).ceil() as usize;
        m.min(self.population_size - self.elite_count())
    }
}

/// Key vector in [0,1) decoding to a permutation by stable argsort.
#[derive(Debug, Clone, PartialEq)]
pub struct PermutationGenome {
    keys: Vec<f64>,
}

impl PermutationGenome {
    pub fn new(keys: Vec<f64>) -> Result<Self> {
        if let Some(&k) = keys.iter().find(|&&k| !(0.0..1.0).contains(&k)) {
            return Err(Error::InvalidParam(format!(
                "genome key {k} outside [0, 1)"
            )));
        }
        Ok(PermutationGenome { keys })
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        PermutationGenome {
            keys: (0..len).map(|_| rng.gen::<f64>()).collect(),
        }
    }

    /// Keys that decode exactly to `perm`.
    pub fn from_permutation(perm: &[usize]) -> Self {
        let m = perm.len();
        let mut keys = vec![0.0; m];
        for (pos, &feature) in perm.iter().enumerate() {
            keys[feature] = pos as f64 / m as f64;
        }
        PermutationGenome { keys }
    }

    pub fn keys(&self) -> &[f64] {
        &self.keys
    }

    pub fn decode(&self) -> Vec<usize> {
        decode_keys(&self.keys)
    }
}

/// Stable argsort: ties decided by the original index, so any key vector,
/// duplicates included, decodes to a valid permutation.
pub fn decode_keys(keys: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..keys.len()).collect();
    idx.sort_unstable_by(|&a, &b| keys[a].total_cmp(&keys[b]).then(a.cmp(&b)));
    idx
}

#[derive(Debug, Clone)]
pub struct BrkgaOutcome {
    pub best_keys: Vec<f64>,
    pub best_permutation: Vec<usize>,
    pub best_value: f64,
    /// Evolution generations actually executed (0 if the start population
    /// already met `stop_below`).
    pub generations: usize,
}

struct Evaluated {
    keys: Vec<f64>,
    perm: Vec<usize>,
    value: f64,
}

/// Minimizes `score` over permutations of {0..m-1}.
///
/// `stream` separates independent searches that share one config seed.
/// `warm_starts` seeds the initial population (useful when a good permutation
/// is already known). `stop_below` ends the search as soon as the best value
/// reaches it.
///
/// All random decisions are drawn from one sequential generator and scoring
/// is a pure function, so the outcome does not depend on how fitness
/// evaluations are scheduled across threads.
pub fn minimize_permutation<F>(
    m: usize,
    cfg: &BrkgaConfig,
    stream: u64,
    warm_starts: &[PermutationGenome],
    stop_below: Option<f64>,
    score: F,
) -> Result<BrkgaOutcome>
where
    F: Fn(&[usize]) -> f64 + Sync,
{
    cfg.validate()?;
    if m == 0 {
        return Err(Error::InvalidParam("nothing to permute".into()));
    }
    for g in warm_starts {
        if g.keys().len() != m {
            return Err(Error::InvalidParam(format!(
                "warm start genome has {} keys, expected {m}",
                g.keys().len()
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(stream);

    let pop_size = cfg.population_size;
    let elites = cfg.elite_count();
    let mutants = cfg.mutant_count();

    let evaluate = |genomes: Vec<PermutationGenome>| -> Vec<Evaluated> {
        use rayon::prelude::*;
        genomes
            .into_par_iter()
            .map(|g| {
                let perm = g.decode();
                let value = score(&perm);
                Evaluated {
                    keys: g.keys,
                    perm,
                    value,
                }
            })
            .collect()
    };

    let mut initial: Vec<PermutationGenome> = warm_starts.iter().take(pop_size).cloned().collect();
    while initial.len() < pop_size {
        initial.push(PermutationGenome::random(m, &mut rng));
    }
    let mut population = evaluate(initial);
    sort_population(&mut population);

    let mut best = clone_entry(&population[0]);
    let mut generations = 0;
    let mut stall = 0;

    let done = |best: &Evaluated| stop_below.is_some_and(|v| best.value <= v);

    if !done(&best) {
        for _ in 0..cfg.max_generations {
            generations += 1;
            let mut offspring: Vec<PermutationGenome> =
                Vec::with_capacity(pop_size - elites - mutants + mutants);
            for _ in 0..mutants {
                offspring.push(PermutationGenome::random(m, &mut rng));
            }
            for _ in 0..(pop_size - elites - mutants) {
                let elite = &population[rng.gen_range(0..elites)];
                let other = &population[rng.gen_range(elites..pop_size)];
                let keys: Vec<f64> = (0..m)
                    .map(|i| {
                        if rng.gen::<f64>() < cfg.elite_inherit_bias {
                            elite.keys[i]
                        } else {
                            other.keys[i]
                        }
                    })
                    .collect();
                offspring.push(PermutationGenome { keys });
            }
            let evaluated = evaluate(offspring);
            population.truncate(elites);
            population.extend(evaluated);
            sort_population(&mut population);

            if population[0].value < best.value {
                best = clone_entry(&population[0]);
                stall = 0;
            } else {
                stall += 1;
            }
            if done(&best) || stall >= cfg.stall_generations {
                break;
            }
        }
    }

    Ok(BrkgaOutcome {
        best_keys: best.keys,
        best_permutation: best.perm,
        best_value: best.value,
        generations,
    })
}

fn clone_entry(e: &Evaluated) -> Evaluated {
    Evaluated {
        keys: e.keys.clone(),
        perm: e.perm.clone(),
        value: e.value,
    }
}

/// Value-ascending order with key ties broken lexicographically, so selection
/// is a total order independent of evaluation scheduling.
fn sort_population(population: &mut [Evaluated]) {
    population.sort_by(|a, b| {
        a.value
            .total_cmp(&b.value)
            .then_with(|| lex_cmp(&a.keys, &b.keys))
    });
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        let c = x.total_cmp(y);
        if c != std::cmp::Ordering::Equal {
            return c;
        }
    }
    std::cmp::Ordering::Equal
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decoding_breaks_ties_by_index() {
        assert_eq!(decode_keys(&[0.5, 0.2, 0.5]), vec![1, 0, 2]);
        assert_eq!(decode_keys(&[0.0, 0.0, 0.0]), vec![0, 1, 2]);
    }

    #[test]
    fn genome_round_trips_through_keys() {
        let perm = vec![3, 0, 4, 1, 2];
        let g = PermutationGenome::from_permutation(&perm);
        assert_eq!(g.decode(), perm);
    }

    #[test]
    fn genome_rejects_out_of_range_keys() {
        assert!(PermutationGenome::new(vec![0.2, 1.0]).is_err());
        assert!(PermutationGenome::new(vec![0.2, -0.1]).is_err());
        assert!(PermutationGenome::new(vec![0.2, 0.999]).is_ok());
    }

    /// Distance of a permutation from a fixed target permutation.
    fn displacement(perm: &[usize], target: &[usize]) -> f64 {
        let mut pos = vec![0usize; perm.len()];
        for (p, &f) in perm.iter().enumerate() {
            pos[f] = p;
        }
        target
            .iter()
            .enumerate()
            .map(|(p, &f)| (pos[f] as f64 - p as f64).abs())
            .sum()
    }

    #[test]
    fn finds_a_planted_permutation() {
        let target = vec![4, 2, 7, 0, 5, 1, 6, 3];
        let cfg = BrkgaConfig::default();
        let out = minimize_permutation(8, &cfg, 0, &[], Some(0.0), |p| {
            displacement(p, &target)
        })
        .unwrap();
        assert_eq!(out.best_value, 0.0);
        assert_eq!(out.best_permutation, target);
    }

    #[test]
    fn same_seed_same_outcome() {
        let target = vec![2, 0, 3, 1];
        let cfg = BrkgaConfig {
            max_generations: 20,
            ..BrkgaConfig::default()
        };
        let run = || {
            minimize_permutation(4, &cfg, 1, &[], None, |p| displacement(p, &target)).unwrap()
        };
        let a = run();
        let b = run();
        assert_eq!(a.best_keys, b.best_keys);
        assert_eq!(a.best_permutation, b.best_permutation);
        assert_eq!(a.best_value, b.best_value);
        assert_eq!(a.generations, b.generations);
    }

    #[test]
    fn warm_start_at_optimum_skips_evolution() {
        let target = vec![1, 3, 0, 2];
        let warm = PermutationGenome::from_permutation(&target);
        let out = minimize_permutation(
            4,
            &BrkgaConfig::default(),
            0,
            &[warm],
            Some(0.0),
            |p| displacement(p, &target),
        )
        .unwrap();
        assert_eq!(out.generations, 0);
        assert_eq!(out.best_permutation, target);
    }

    #[test]
    fn stall_limit_truncates_run() {
        // Constant score can never improve; run must end after the stall window.
        let cfg = BrkgaConfig {
            stall_generations: 5,
            ..BrkgaConfig::default()
        };
        let out = minimize_permutation(6, &cfg, 0, &[], None, |_| 1.0).unwrap();
        assert_eq!(out.generations, 5);
    }

    #[test]
    fn config_validation_catches_bad_fractions() {
        let mut cfg = BrkgaConfig::default();
        cfg.elite_fraction = 0.9;
        cfg.mutant_fraction = 0.2;
        assert!(cfg.validate().is_err());
        cfg = BrkgaConfig::default();
        cfg.elite_inherit_bias = 0.3;
        assert!(cfg.validate().is_err());
        cfg = BrkgaConfig::default();
        cfg.population_size = 1;
        assert!(cfg.validate().is_err());
    }
}
