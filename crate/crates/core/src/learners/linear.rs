use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::tree::check_matrix;
use super::{check_dimension, Regressor};
use crate::error::{Error, Result};

/// Diagonal term added when the normal equations are singular.
pub const RIDGE_FALLBACK: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    /// True when the ridge fallback was needed.
    pub ridge: bool,
    pub feature_names: Vec<String>,
}

impl LinearModel {
    /// Ordinary least squares with an intercept, falling back to a tiny
    /// ridge penalty when `allow_ridge` is set and `XᵀX` is singular.
    pub fn fit(x: &[Vec<f64>], y: &[f64], feature_names: Vec<String>, allow_ridge: bool) -> Result<Self> {
        let d = check_matrix(x, y.len())?;
        if feature_names.len() != d {
            return Err(Error::DimensionMismatch {
                expected: feature_names.len(),
                found: d,
            });
        }
        if x.len() <= d {
            return Err(Error::Dataset(format!(
                "least squares needs more than {d} rows, got {}",
                x.len()
            )));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Dataset("non-finite regression target".into()));
        }
        // centring removes the intercept column and improves conditioning
        let n = x.len() as f64;
        let x_mean: Vec<f64> = (0..d).map(|j| x.iter().map(|r| r[j]).sum::<f64>() / n).collect();
        let y_mean = y.iter().sum::<f64>() / n;
        let a = DMatrix::from_fn(x.len(), d, |i, j| x[i][j] - x_mean[j]);
        let b = DVector::from_iterator(y.len(), y.iter().map(|v| v - y_mean));
        let ata = a.transpose() * &a;
        let atb = a.transpose() * b;

        let scale = ata.diagonal().iter().copied().fold(0.0, f64::max).max(1.0);
        let well_posed = ata
            .clone()
            .cholesky()
            .filter(|c| c.l().diagonal().iter().all(|&v| v * v > scale * 1e-12));
        let (beta, ridge) = match well_posed {
            Some(c) => (c.solve(&atb), false),
            None if allow_ridge => {
                let reg = ata + DMatrix::identity(d, d) * RIDGE_FALLBACK;
                let c = reg.cholesky().ok_or(Error::Singular)?;
                (c.solve(&atb), true)
            }
            None => return Err(Error::Singular),
        };
        let coefficients: Vec<f64> = beta.iter().copied().collect();
        let intercept = y_mean - coefficients.iter().zip(&x_mean).map(|(c, m)| c * m).sum::<f64>();
        Ok(LinearModel {
            coefficients,
            intercept,
            ridge,
            feature_names,
        })
    }
}

impl Regressor for LinearModel {
    fn predict(&self, x: &[f64]) -> Result<f64> {
        check_dimension(self.coefficients.len(), x)?;
        Ok(self.intercept + self.coefficients.iter().zip(x).map(|(c, v)| c * v).sum::<f64>())
    }
}
