//! All-threshold ordinal regression: a linear score compared against K-1
//! ordered thresholds, trained with a logistic or squared-hinge margin
//! penalty on every threshold.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Margin penalty applied to each (sample, threshold) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    Logistic,
    Squared,
}

impl LossKind {
    pub fn parse(s: &str) -> Result<LossKind> {
        match s.to_ascii_lowercase().as_str() {
            "logistic" => Ok(LossKind::Logistic),
            "squared" => Ok(LossKind::Squared),
            other => Err(Error::Invalid(format!("unknown ordinal loss '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            LossKind::Logistic => "logistic",
            LossKind::Squared => "squared",
        }
    }

    fn penalty(&self, z: f64) -> f64 {
        match self {
            // log(1 + exp(-z)), stable on both tails
            LossKind::Logistic => {
                if z > 0.0 {
                    (-z).exp().ln_1p()
                } else {
                    -z + z.exp().ln_1p()
                }
            }
            LossKind::Squared => {
                let m = (1.0 - z).max(0.0);
                m * m
            }
        }
    }

    fn penalty_grad(&self, z: f64) -> f64 {
        match self {
            // -sigmoid(-z)
            LossKind::Logistic => {
                if z > 0.0 {
                    let e = (-z).exp();
                    -e / (1.0 + e)
                } else {
                    -1.0 / (1.0 + z.exp())
                }
            }
            LossKind::Squared => -2.0 * (1.0 - z).max(0.0),
        }
    }
}

/// Fitted all-threshold model.
///
/// Prediction counts strict threshold exceedances of the linear score, so the
/// output class is `|{j : w.x > theta_j}|` and ties go to the lower class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrdinalThresholdModel {
    pub weights: Vec<f64>,
    /// K-1 non-decreasing thresholds.
    pub thresholds: Vec<f64>,
    pub n_classes: usize,
    pub loss: LossKind,
    pub lambda: f64,
    /// False when the optimizer hit its iteration cap before reaching the
    /// gradient tolerance; the model still holds the best iterate found.
    pub converged: bool,
}

/// Optimizer settings for [`ordinal_fit`]: full-batch gradient descent with
/// backtracking line search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrdinalFitConfig {
    pub max_iters: usize,
    pub grad_tol: f64,
}

impl Default for OrdinalFitConfig {
    fn default() -> Self {
        OrdinalFitConfig { max_iters: 2000, grad_tol: 1e-6 }
    }
}

/// Sign of threshold `t` (0-based) for a sample of class `y`: +1 when the
/// threshold sits at or above the class, -1 below it.
fn side(t: usize, y: usize) -> f64 {
    if t >= y {
        1.0
    } else {
        -1.0
    }
}

/// All-threshold objective:
/// `sum_i sum_t f(side(t, y_i) * (theta_t - w.x_i)) + lambda/2 * ||w||^2`.
pub fn ordinal_objective(
    x: &Matrix,
    y: &[usize],
    loss: LossKind,
    lambda: f64,
    weights: &[f64],
    thresholds: &[f64],
) -> f64 {
    let mut total = 0.0;
    for (row, &yi) in x.rows().zip(y) {
        let score: f64 = row.iter().zip(weights).map(|(v, w)| v * w).sum();
        for (t, &theta) in thresholds.iter().enumerate() {
            total += loss.penalty(side(t, yi) * (theta - score));
        }
    }
    total + 0.5 * lambda * weights.iter().map(|w| w * w).sum::<f64>()
}

/// Analytic gradient of [`ordinal_objective`] with respect to `(weights, thresholds)`.
pub fn ordinal_gradient(
    x: &Matrix,
    y: &[usize],
    loss: LossKind,
    lambda: f64,
    weights: &[f64],
    thresholds: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let d = weights.len();
    let mut grad_w = vec![0.0; d];
    let mut grad_t = vec![0.0; thresholds.len()];
    for (row, &yi) in x.rows().zip(y) {
        let score: f64 = row.iter().zip(weights).map(|(v, w)| v * w).sum();
        let mut dscore = 0.0;
        for (t, &theta) in thresholds.iter().enumerate() {
            let s = side(t, yi);
            let g = loss.penalty_grad(s * (theta - score));
            grad_t[t] += s * g;
            dscore -= s * g;
        }
        for (gw, v) in grad_w.iter_mut().zip(row) {
            *gw += dscore * v;
        }
    }
    for (gw, w) in grad_w.iter_mut().zip(weights) {
        *gw += lambda * w;
    }
    (grad_w, grad_t)
}

/// Euclidean projection onto the non-decreasing cone (pool adjacent violators).
fn project_non_decreasing(values: &mut [f64]) {
    let n = values.len();
    if n < 2 {
        return;
    }
    // blocks of (mean, count)
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(n);
    for &v in values.iter() {
        let mut mean = v;
        let mut count = 1usize;
        while let Some(&(prev_mean, prev_count)) = blocks.last() {
            if prev_mean <= mean {
                break;
            }
            mean =
                (prev_mean * prev_count as f64 + mean * count as f64) / (prev_count + count) as f64;
            count += prev_count;
            blocks.pop();
        }
        blocks.push((mean, count));
    }
    let mut i = 0;
    for (mean, count) in blocks {
        for _ in 0..count {
            values[i] = mean;
            i += 1;
        }
    }
}

/// Type-7 style empirical quantile of a sorted slice.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = p * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi.min(n - 1)] * frac
}

pub fn ordinal_fit(
    x: &Matrix,
    y: &[usize],
    n_classes: usize,
    loss: LossKind,
    lambda: f64,
    config: OrdinalFitConfig,
) -> Result<OrdinalThresholdModel> {
    fit_impl(x, y, n_classes, loss, lambda, config, None)
}

/// Fit with an optional trace of the objective at every accepted step.
pub(crate) fn fit_impl(
    x: &Matrix,
    y: &[usize],
    n_classes: usize,
    loss: LossKind,
    lambda: f64,
    config: OrdinalFitConfig,
    mut trace: Option<&mut Vec<f64>>,
) -> Result<OrdinalThresholdModel> {
    if n_classes < 2 {
        return Err(Error::Invalid(format!("ordinal fit needs K >= 2, got {n_classes}")));
    }
    if x.n_rows() != y.len() || y.is_empty() {
        return Err(Error::Invalid(format!(
            "ordinal fit needs rows(X) = len(y) >= 1, got {} rows and {} labels",
            x.n_rows(),
            y.len()
        )));
    }
    if let Some(&bad) = y.iter().find(|&&c| c >= n_classes) {
        return Err(Error::Invalid(format!("label {bad} outside class range 0..{n_classes}")));
    }
    if y.iter().all(|&c| c == y[0]) {
        return Err(Error::Invalid(
            "ordinal fit needs at least 2 distinct labels, all labels are identical".into(),
        ));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::Invalid(format!(
            "lambda must be a finite non-negative real, got {lambda}"
        )));
    }

    let d = x.n_cols();
    let mut weights = vec![0.0; d];
    // thresholds start at equally spaced quantiles of the label distribution
    let mut sorted_labels: Vec<f64> = y.iter().map(|&c| c as f64).collect();
    sorted_labels.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut thresholds: Vec<f64> =
        (1..n_classes).map(|j| quantile(&sorted_labels, j as f64 / n_classes as f64)).collect();
    project_non_decreasing(&mut thresholds);

    let mut objective = ordinal_objective(x, y, loss, lambda, &weights, &thresholds);
    if let Some(t) = trace.as_deref_mut() {
        t.push(objective);
    }
    let mut best = (objective, weights.clone(), thresholds.clone());
    let mut converged = false;
    let mut step: f64 = 1.0;

    for _ in 0..config.max_iters {
        let (gw, gt) = ordinal_gradient(x, y, loss, lambda, &weights, &thresholds);
        let grad_norm = gw.iter().chain(gt.iter()).map(|g| g * g).sum::<f64>().sqrt();
        if grad_norm <= config.grad_tol {
            converged = true;
            break;
        }

        // backtracking line search with projected sufficient decrease
        let mut accepted = false;
        let mut t = (step * 2.0).min(1e6);
        while t > 1e-18 {
            let cand_w: Vec<f64> = weights.iter().zip(&gw).map(|(w, g)| w - t * g).collect();
            let mut cand_t: Vec<f64> =
                thresholds.iter().zip(&gt).map(|(th, g)| th - t * g).collect();
            project_non_decreasing(&mut cand_t);
            let cand_obj = ordinal_objective(x, y, loss, lambda, &cand_w, &cand_t);
            let moved: f64 = cand_w
                .iter()
                .zip(&weights)
                .map(|(a, b)| (a - b) * (a - b))
                .chain(cand_t.iter().zip(&thresholds).map(|(a, b)| (a - b) * (a - b)))
                .sum();
            if cand_obj <= objective - 1e-4 * moved / t {
                weights = cand_w;
                thresholds = cand_t;
                objective = cand_obj;
                step = t;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            // no descent step exists at machine precision
            converged = grad_norm <= config.grad_tol * 1e3;
            break;
        }
        if let Some(t) = trace.as_deref_mut() {
            t.push(objective);
        }
        if objective < best.0 {
            best = (objective, weights.clone(), thresholds.clone());
        }
    }

    let (_, weights, thresholds) = best;
    Ok(OrdinalThresholdModel { weights, thresholds, n_classes, loss, lambda, converged })
}

/// Predicted class: number of thresholds strictly below the score.
pub fn ordinal_predict(model: &OrdinalThresholdModel, x: &[f64]) -> Result<usize> {
    if x.len() != model.weights.len() {
        return Err(Error::DimensionMismatch { expected: model.weights.len(), got: x.len() });
    }
    let score: f64 = x.iter().zip(&model.weights).map(|(v, w)| v * w).sum();
    Ok(model.thresholds.iter().filter(|&&t| score > t).count())
}

/// Predict every row of a matrix.
pub fn ordinal_predict_all(model: &OrdinalThresholdModel, x: &Matrix) -> Result<Vec<usize>> {
    x.rows().map(|row| ordinal_predict(model, row)).collect()
}
