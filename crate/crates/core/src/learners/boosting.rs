use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tree::{check_matrix, DecisionTree, TreeParams};
use super::{check_dimension, Regressor};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoostingParams {
    pub n_stages: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
}

impl Default for BoostingParams {
    fn default() -> Self {
        BoostingParams {
            n_stages: 100,
            learning_rate: 0.1,
            max_depth: 3,
            min_samples_leaf: 1,
        }
    }
}

/// Squared-error gradient boosting: `init_value + learning_rate * sum(trees)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientBoostedModel {
    pub init_value: f64,
    pub trees: Vec<DecisionTree>,
    pub params: BoostingParams,
    pub seed: u64,
    pub feature_names: Vec<String>,
}

pub fn mse(pred: &[f64], y: &[f64]) -> f64 {
    if y.is_empty() {
        return 0.0;
    }
    pred.iter().zip(y).map(|(p, t)| (p - t) * (p - t)).sum::<f64>() / y.len() as f64
}

impl GradientBoostedModel {
    pub fn fit(
        x: &[Vec<f64>],
        y: &[f64],
        feature_names: Vec<String>,
        params: &BoostingParams,
        seed: u64,
    ) -> Result<Self> {
        Self::fit_with_history(x, y, feature_names, params, seed).map(|(m, _)| m)
    }

    /// Also returns the training MSE after 0, 1, ..., `n_stages` stages.
    pub fn fit_with_history(
        x: &[Vec<f64>],
        y: &[f64],
        feature_names: Vec<String>,
        params: &BoostingParams,
        seed: u64,
    ) -> Result<(Self, Vec<f64>)> {
        let d = check_matrix(x, y.len())?;
        if feature_names.len() != d {
            return Err(Error::DimensionMismatch {
                expected: feature_names.len(),
                found: d,
            });
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Dataset("non-finite regression target".into()));
        }
        let lr = params.learning_rate;
        if !(lr > 0.0 && lr <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "learning rate {lr} outside (0, 1]"
            )));
        }
        let init_value = y.iter().sum::<f64>() / y.len() as f64;
        let tree_params = TreeParams {
            min_samples_leaf: params.min_samples_leaf,
            ..TreeParams::regression(params.max_depth)
        };
        // all features are considered, so the generator is never consumed
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pred = vec![init_value; y.len()];
        let mut history = vec![mse(&pred, y)];
        let mut trees = Vec::with_capacity(params.n_stages);
        let mut residual = vec![0.0; y.len()];
        for _ in 0..params.n_stages {
            for ((r, t), p) in residual.iter_mut().zip(y).zip(&pred) {
                *r = t - p;
            }
            let tree = DecisionTree::fit(x, &residual, &tree_params, &mut rng)?;
            for (p, row) in pred.iter_mut().zip(x) {
                *p += lr * tree.predict(row);
            }
            history.push(mse(&pred, y));
            trees.push(tree);
        }
        let model = GradientBoostedModel {
            init_value,
            trees,
            params: *params,
            seed,
            feature_names,
        };
        Ok((model, history))
    }

    /// Unclamped model output.
    pub fn predict_raw(&self, x: &[f64]) -> Result<f64> {
        check_dimension(self.feature_names.len(), x)?;
        let mut out = self.init_value;
        for t in &self.trees {
            out += self.params.learning_rate * t.predict(x);
        }
        Ok(out)
    }
}

impl Regressor for GradientBoostedModel {
    fn predict(&self, x: &[f64]) -> Result<f64> {
        self.predict_raw(x)
    }
}
