//! Ridge regression via regularized normal equations on centered data.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Linear model minimizing `||Xw + b - y||^2 + lambda * ||w||^2` with an
/// unpenalized intercept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub lambda: f64,
}

/// Fit by solving `(Xc'Xc + lambda I) w = Xc'yc` on centered data. A singular
/// system (only possible at `lambda = 0`) falls back to the minimum-norm
/// least-squares solution via SVD.
pub fn ridge_fit(x: &Matrix, y: &[f64], lambda: f64) -> Result<RidgeModel> {
    let n = x.n_rows();
    let d = x.n_cols();
    if n == 0 || n != y.len() {
        return Err(Error::Invalid(format!(
            "ridge_fit needs rows(X) = len(y) >= 1, got {n} rows and {} targets",
            y.len()
        )));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::Invalid(format!(
            "lambda must be a finite non-negative real, got {lambda}"
        )));
    }
    let y_mean = y.iter().sum::<f64>() / n as f64;
    if d == 0 {
        return Ok(RidgeModel { weights: Vec::new(), intercept: y_mean, lambda });
    }

    let x_mean = x.column_means();
    let xc = DMatrix::from_fn(n, d, |i, j| x.get(i, j) - x_mean[j]);
    let yc = DVector::from_fn(n, |i, _| y[i] - y_mean);

    // lambda > 0 makes the Gram matrix positive definite; at lambda = 0 the
    // system may be singular, so take the minimum-norm least-squares solution
    let min_norm = |xc: &DMatrix<f64>, yc: &DVector<f64>| -> Result<DVector<f64>> {
        let svd = xc.clone().svd(true, true);
        let sol = svd
            .solve(yc, 1e-10)
            .map_err(|e| Error::Invalid(format!("ridge SVD solve failed: {e}")))?;
        Ok(DVector::from_column_slice(sol.as_slice()))
    };
    let w = if lambda == 0.0 {
        min_norm(&xc, &yc)?
    } else {
        let rhs = xc.transpose() * &yc;
        let gram = xc.transpose() * &xc + DMatrix::identity(d, d) * lambda;
        match gram.cholesky() {
            Some(chol) => chol.solve(&rhs),
            None => min_norm(&xc, &yc)?,
        }
    };

    let weights: Vec<f64> = w.iter().copied().collect();
    let intercept = y_mean - weights.iter().zip(&x_mean).map(|(w, m)| w * m).sum::<f64>();
    Ok(RidgeModel { weights, intercept, lambda })
}

/// Predict `Xw + b` for every row.
pub fn ridge_predict(model: &RidgeModel, x: &Matrix) -> Result<Vec<f64>> {
    if x.n_cols() != model.weights.len() {
        return Err(Error::DimensionMismatch { expected: model.weights.len(), got: x.n_cols() });
    }
    Ok(x.rows()
        .map(|row| {
            model.intercept + row.iter().zip(&model.weights).map(|(v, w)| v * w).sum::<f64>()
        })
        .collect())
}

/// Ridge objective, used by optimality checks.
pub fn ridge_objective(x: &Matrix, y: &[f64], weights: &[f64], intercept: f64, lambda: f64) -> f64 {
    let fit: f64 = x
        .rows()
        .zip(y)
        .map(|(row, &yi)| {
            let pred = intercept + row.iter().zip(weights).map(|(v, w)| v * w).sum::<f64>();
            (pred - yi).powi(2)
        })
        .sum();
    fit + lambda * weights.iter().map(|w| w * w).sum::<f64>()
}
