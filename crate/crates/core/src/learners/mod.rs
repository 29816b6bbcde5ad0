//! Decision trees, a random-forest classifier, a gradient-boosted regressor,
//! and naive-Bayes / least-squares baselines.

pub mod bayes;
pub mod boosting;
pub mod forest;
pub mod linear;
pub mod persist;
pub mod tree;

pub use bayes::GaussianNbModel;
pub use boosting::{BoostingParams, GradientBoostedModel};
pub use forest::{ForestParams, RandomForestModel};
pub use linear::LinearModel;
pub use persist::{load_model, save_model, Model, ModelType, FORMAT_VERSION};
pub use tree::{Criterion, DecisionTree, LeafValue, TreeNode, TreeParams};

use crate::error::{Error, Result};

/// Probability threshold for the positive class.
pub const DECISION_THRESHOLD: f64 = 0.5;

pub trait Classifier: Sync {
    /// Probability of class 1.
    fn predict_proba(&self, x: &[f64]) -> Result<f64>;

    fn predict(&self, x: &[f64]) -> Result<u8> {
        Ok(u8::from(self.predict_proba(x)? >= DECISION_THRESHOLD))
    }
}

pub trait Regressor: Sync {
    fn predict(&self, x: &[f64]) -> Result<f64>;

    /// Prediction as a vote count, which cannot be negative.
    fn predict_votes(&self, x: &[f64]) -> Result<f64> {
        Ok(self.predict(x)?.max(0.0))
    }
}

pub(crate) fn check_dimension(expected: usize, x: &[f64]) -> Result<()> {
    if x.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: x.len(),
        });
    }
    Ok(())
}
