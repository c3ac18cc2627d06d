//! Stagewise gradient boosting with squared-error loss: each round fits a
//! regression tree to the current residuals.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

use super::tree::{grow_tree, GrowParams, TreeTarget};
use super::{EnsembleKind, HyperParams, ModelTask, TreeEnsembleModel};

/// Fit a boosted ensemble on real-valued targets. For ordinal tasks the class
/// labels are passed in as reals and predictions are rounded and clamped by
/// the classification predict path.
pub fn gbt_fit(
    x: &Matrix,
    y: &[f64],
    params: &HyperParams,
    task: ModelTask,
    n_classes: usize,
    seed_value: u64,
) -> Result<TreeEnsembleModel> {
    let HyperParams::Gbt { rounds, max_depth, learning_rate, min_samples_leaf } = *params else {
        return Err(Error::Invalid("gbt_fit requires gbt hyper-parameters".into()));
    };
    params.validate()?;
    let n = x.n_rows();
    if n < 2 || n != y.len() {
        return Err(Error::Invalid(format!(
            "gbt_fit needs rows(X) = len(y) >= 2, got {n} rows and {} targets",
            y.len()
        )));
    }

    let base_score = y.iter().sum::<f64>() / n as f64;
    let grow = GrowParams { max_depth: Some(max_depth), min_samples_leaf, feature_fraction: 1.0 };
    let indices: Vec<usize> = (0..n).collect();
    let mut residuals: Vec<f64> = y.iter().map(|yi| yi - base_score).collect();
    let mut trees = Vec::with_capacity(rounds);
    // boosting uses no randomness; the rng only feeds the (full) feature draw
    let mut rng = ChaCha8Rng::seed_from_u64(seed_value);
    for _ in 0..rounds {
        let tree = grow_tree(x, &residuals, &indices, TreeTarget::Regression, grow, &mut rng);
        for (i, r) in residuals.iter_mut().enumerate() {
            *r -= learning_rate * tree.predict_real(x.row(i));
        }
        trees.push(tree);
    }

    Ok(TreeEnsembleModel {
        kind: EnsembleKind::GradientBoosted,
        task,
        trees,
        learning_rate,
        base_score,
        seed: seed_value,
        n_features: x.n_cols(),
        n_classes: if matches!(task, ModelTask::Classification) { n_classes } else { 0 },
    })
}
