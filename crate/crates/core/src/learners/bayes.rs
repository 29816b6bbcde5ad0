use serde::{Deserialize, Serialize};

use super::tree::check_matrix;
use super::{check_dimension, Classifier};
use crate::error::{Error, Result};

/// Added to every variance, relative to the largest feature variance.
pub const VAR_SMOOTHING: f64 = 1e-9;

/// Gaussian naive Bayes over two classes; index 0 and 1 are the class labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNbModel {
    pub priors: [f64; 2],
    pub means: [Vec<f64>; 2],
    /// Smoothed, so strictly positive.
    pub variances: [Vec<f64>; 2],
    pub epsilon: f64,
    pub feature_names: Vec<String>,
}

fn mean_var(rows: &[&Vec<f64>], d: usize) -> (Vec<f64>, Vec<f64>) {
    let n = rows.len() as f64;
    let mut mean = vec![0.0; d];
    for r in rows {
        for (m, v) in mean.iter_mut().zip(r.iter()) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; d];
    for r in rows {
        for ((s, v), m) in var.iter_mut().zip(r.iter()).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    var.iter_mut().for_each(|s| *s /= n);
    (mean, var)
}

impl GaussianNbModel {
    pub fn fit(x: &[Vec<f64>], y: &[u8], feature_names: Vec<String>) -> Result<Self> {
        let d = check_matrix(x, y.len())?;
        if feature_names.len() != d {
            return Err(Error::DimensionMismatch {
                expected: feature_names.len(),
                found: d,
            });
        }
        let by_class: [Vec<&Vec<f64>>; 2] = [0u8, 1].map(|c| {
            x.iter()
                .zip(y)
                .filter(|(_, &l)| l == c)
                .map(|(r, _)| r)
                .collect()
        });
        if by_class.iter().any(Vec::is_empty) {
            return Err(Error::Degenerate(
                "naive Bayes needs both classes in the training set".into(),
            ));
        }
        let all: Vec<&Vec<f64>> = x.iter().collect();
        let (_, overall) = mean_var(&all, d);
        let max_var = overall.iter().copied().fold(0.0, f64::max);
        // all-constant features still get a positive variance
        let epsilon = if max_var > 0.0 { VAR_SMOOTHING * max_var } else { VAR_SMOOTHING };
        let n = x.len() as f64;
        let [(m0, v0), (m1, v1)] = [0, 1].map(|c| {
            let (m, mut v) = mean_var(&by_class[c], d);
            v.iter_mut().for_each(|s| *s += epsilon);
            (m, v)
        });
        Ok(GaussianNbModel {
            priors: [by_class[0].len() as f64 / n, by_class[1].len() as f64 / n],
            means: [m0, m1],
            variances: [v0, v1],
            epsilon,
            feature_names,
        })
    }

    /// Unnormalised log posterior of each class.
    pub fn joint_log_likelihood(&self, x: &[f64]) -> Result<[f64; 2]> {
        check_dimension(self.feature_names.len(), x)?;
        Ok([0, 1].map(|c| {
            let ll: f64 = x
                .iter()
                .zip(&self.means[c])
                .zip(&self.variances[c])
                .map(|((v, m), s)| -0.5 * (2.0 * std::f64::consts::PI * s).ln() - (v - m) * (v - m) / (2.0 * s))
                .sum();
            self.priors[c].ln() + ll
        }))
    }
}

impl Classifier for GaussianNbModel {
    fn predict_proba(&self, x: &[f64]) -> Result<f64> {
        let [l0, l1] = self.joint_log_likelihood(x)?;
        // logistic of the log-odds, stable for large magnitudes
        let z = l1 - l0;
        Ok(if z >= 0.0 {
            1.0 / (1.0 + (-z).exp())
        } else {
            let e = z.exp();
            e / (1.0 + e)
        })
    }
}
