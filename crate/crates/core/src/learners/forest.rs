use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{check_matrix, DecisionTree, TreeParams};
use super::{check_dimension, Classifier};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    /// `None` resolves to `floor(sqrt(d))`, at least 1.
    pub max_features: Option<usize>,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    /// Off only in tests: every tree then sees the full training set.
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            max_features: None,
            max_depth: None,
            min_samples_leaf: 1,
            bootstrap: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomForestModel {
    pub trees: Vec<DecisionTree>,
    pub params: ForestParams,
    /// Resolved per-node feature count.
    pub max_features: usize,
    pub seed: u64,
    pub feature_names: Vec<String>,
}

pub fn resolve_max_features(requested: Option<usize>, d: usize) -> usize {
    requested
        .unwrap_or_else(|| (d as f64).sqrt().floor() as usize)
        .clamp(1, d.max(1))
}

/// The generator for tree `i`.
pub fn tree_rng(seed: u64, i: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64))
}

impl RandomForestModel {
    pub fn fit(
        x: &[Vec<f64>],
        y: &[u8],
        feature_names: Vec<String>,
        params: &ForestParams,
        seed: u64,
    ) -> Result<Self> {
        let d = check_matrix(x, y.len())?;
        if feature_names.len() != d {
            return Err(Error::DimensionMismatch {
                expected: feature_names.len(),
                found: d,
            });
        }
        if params.n_trees == 0 {
            return Err(Error::InvalidInput("n_trees must be at least 1".into()));
        }
        if !(y.contains(&0) && y.contains(&1)) {
            return Err(Error::Degenerate(
                "random forest needs both classes in the training set".into(),
            ));
        }
        let max_features = resolve_max_features(params.max_features, d);
        let tree_params = TreeParams {
            max_depth: params.max_depth,
            min_samples_leaf: params.min_samples_leaf,
            max_features: Some(max_features),
            ..TreeParams::classification()
        };
        let targets: Vec<f64> = y.iter().map(|&l| f64::from(l)).collect();
        let n = x.len();
        let trees = (0..params.n_trees)
            .into_par_iter()
            .map(|i| {
                let mut rng = tree_rng(seed, i);
                let mut idx: Vec<usize> = if params.bootstrap {
                    (0..n).map(|_| rng.gen_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                DecisionTree::fit_on(x, &targets, &mut idx, &tree_params, &mut rng)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(RandomForestModel {
            trees,
            params: *params,
            max_features,
            seed,
            feature_names,
        })
    }
}

impl Classifier for RandomForestModel {
    /// Mean over trees of the leaf class-1 fraction.
    fn predict_proba(&self, x: &[f64]) -> Result<f64> {
        check_dimension(self.feature_names.len(), x)?;
        let sum: f64 = self.trees.iter().map(|t| t.predict(x)).sum();
        Ok(sum / self.trees.len() as f64)
    }
}
