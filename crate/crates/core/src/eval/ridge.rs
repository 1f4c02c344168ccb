//! Default coalition value: baseline-subtracted fit quality of a closed-form
//! ridge model on the subset's combined features.
//!
//! Regression scores by coefficient of determination; classification fits
//! one-hot targets by the same ridge solve and scores argmax accuracy. The
//! empty subset reduces to the intercept-only model (label mean or majority
//! class), and subtracting its quality anchors v(empty) at exactly 0.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{GlobalDataset, PartyPartition};
use crate::error::{Error, Result};
use crate::eval::shapley::CharacteristicFn;

pub const DEFAULT_RIDGE_LAMBDA: f64 = 1e-3;
const TRAIN_FRACTION: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Regression,
    Classification,
}

impl std::str::FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reg" | "regression" => Ok(Task::Regression),
            "cls" | "classification" => Ok(Task::Classification),
            other => Err(Error::InvalidParam(format!(
                "unknown task '{other}' (expected 'reg' or 'cls')"
            ))),
        }
    }
}

/// Ridge-based coalition value over a partitioned, labeled dataset.
pub struct RidgeValue<'a> {
    ds: &'a GlobalDataset,
    parties: Vec<Vec<usize>>,
    task: Task,
    lambda: f64,
    train_idx: Vec<usize>,
    eval_idx: Vec<usize>,
    /// Distinct label values, ascending; class targets for classification.
    classes: Vec<f64>,
    baseline: f64,
}

impl<'a> RidgeValue<'a> {
    pub fn new(
        ds: &'a GlobalDataset,
        part: &PartyPartition,
        task: Task,
        seed: u64,
    ) -> Result<Self> {
        Self::with_lambda(ds, part, task, DEFAULT_RIDGE_LAMBDA, seed)
    }

    pub fn with_lambda(
        ds: &'a GlobalDataset,
        part: &PartyPartition,
        task: Task,
        lambda: f64,
        seed: u64,
    ) -> Result<Self> {
        part.check_matches(ds)?;
        let labels = ds
            .labels()
            .ok_or_else(|| Error::InvalidParam("dataset has no labels".into()))?;
        if !(lambda > 0.0) {
            return Err(Error::InvalidParam("lambda must be positive".into()));
        }
        let n = ds.n_samples();
        if n < 5 {
            return Err(Error::TooFewSamples(n));
        }
        // Seeded shuffle, then a fixed 80/20 cut. The same rows score every
        // subset, so values are comparable across coalitions.
        let mut order: Vec<usize> = (0..n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in (1..n).rev() {
            order.swap(i, rng.gen_range(0..=i));
        }
        let train_len = (((n as f64) * TRAIN_FRACTION) as usize).clamp(1, n - 1);
        let train_idx = order[..train_len].to_vec();
        let eval_idx = order[train_len..].to_vec();

        let mut classes = Vec::new();
        if task == Task::Classification {
            classes = labels.to_vec();
            classes.sort_by(f64::total_cmp);
            classes.dedup();
            if classes.len() < 2 {
                return Err(Error::InvalidParam(
                    "classification needs at least 2 distinct label values".into(),
                ));
            }
        }

        let mut cf = RidgeValue {
            ds,
            parties: part.all_party_columns(),
            task,
            lambda,
            train_idx,
            eval_idx,
            classes,
            baseline: 0.0,
        };
        cf.baseline = cf.quality(&[])?;
        Ok(cf)
    }

    pub fn num_parties(&self) -> usize {
        self.parties.len()
    }

    fn columns_of_subset(&self, subset: &[usize]) -> Result<Vec<usize>> {
        let mut cols = Vec::new();
        for &p in subset {
            if p >= self.parties.len() {
                return Err(Error::InvalidParam(format!(
                    "party {p} out of range for {} parties",
                    self.parties.len()
                )));
            }
            cols.extend_from_slice(&self.parties[p]);
        }
        cols.sort_unstable();
        Ok(cols)
    }

    /// Design matrix of the given columns plus a trailing intercept column,
    /// restricted to the given rows.
    fn design(&self, cols: &[usize], rows: &[usize]) -> DMatrix<f64> {
        let mut x = DMatrix::zeros(rows.len(), cols.len() + 1);
        let mut buf = vec![0.0; self.ds.n_samples()];
        for (j, &col) in cols.iter().enumerate() {
            self.ds.fill_column(col, &mut buf);
            for (r, &row) in rows.iter().enumerate() {
                x[(r, j)] = buf[row];
            }
        }
        for r in 0..rows.len() {
            x[(r, cols.len())] = 1.0;
        }
        x
    }

    /// Solves (X^T X + lambda * D) W = X^T Y with the intercept unpenalized.
    /// The system is positive definite for lambda > 0, so Cholesky cannot
    /// fail on finite inputs.
    fn solve(&self, x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let p = x.ncols();
        let mut gram = x.transpose() * x;
        for j in 0..p - 1 {
            gram[(j, j)] += self.lambda;
        }
        let chol = Cholesky::new(gram).ok_or_else(|| {
            Error::InvalidParam("ridge system is not positive definite".into())
        })?;
        Ok(chol.solve(&(x.transpose() * y)))
    }

    fn quality(&self, cols: &[usize]) -> Result<f64> {
        let labels = self.ds.labels().expect("checked at construction");
        let x_train = self.design(cols, &self.train_idx);
        let x_eval = self.design(cols, &self.eval_idx);
        match self.task {
            Task::Regression => {
                let y_train = DVector::from_iterator(
                    self.train_idx.len(),
                    self.train_idx.iter().map(|&i| labels[i]),
                );
                let w = self.solve(&x_train, &DMatrix::from_column_slice(
                    y_train.len(),
                    1,
                    y_train.as_slice(),
                ))?;
                let pred = x_eval * &w;
                let y_eval: Vec<f64> = self.eval_idx.iter().map(|&i| labels[i]).collect();
                Ok(r_squared(&y_eval, pred.column(0).as_slice()))
            }
            Task::Classification => {
                // One-hot least squares; prediction is the argmax class score.
                let c = self.classes.len();
                let mut y = DMatrix::zeros(self.train_idx.len(), c);
                for (r, &i) in self.train_idx.iter().enumerate() {
                    let class = self
                        .classes
                        .iter()
                        .position(|&v| v == labels[i])
                        .expect("classes cover all labels");
                    y[(r, class)] = 1.0;
                }
                let w = self.solve(&x_train, &y)?;
                let scores = x_eval * &w;
                let mut hits = 0usize;
                for (r, &i) in self.eval_idx.iter().enumerate() {
                    let mut best = 0usize;
                    for j in 1..c {
                        if scores[(r, j)] > scores[(r, best)] {
                            best = j;
                        }
                    }
                    if self.classes[best] == labels[i] {
                        hits += 1;
                    }
                }
                Ok(hits as f64 / self.eval_idx.len() as f64)
            }
        }
    }
}

fn r_squared(truth: &[f64], pred: &[f64]) -> f64 {
    let n = truth.len() as f64;
    let mean = truth.iter().sum::<f64>() / n;
    let ss_tot: f64 = truth.iter().map(|&y| (y - mean) * (y - mean)).sum();
    let ss_res: f64 = truth
        .iter()
        .zip(pred)
        .map(|(&y, &p)| (y - p) * (y - p))
        .sum();
    if ss_tot == 0.0 {
        // Constant eval labels: scale-free quality is 1 for a perfect fit,
        // else penalize by raw residual.
        return if ss_res == 0.0 { 1.0 } else { -ss_res };
    }
    1.0 - ss_res / ss_tot
}

impl CharacteristicFn for RidgeValue<'_> {
    fn value(&self, subset: &[usize]) -> Result<f64> {
        let cols = self.columns_of_subset(subset)?;
        Ok(self.quality(&cols)? - self.baseline)
    }
}
