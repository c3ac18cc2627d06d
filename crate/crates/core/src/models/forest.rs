//! Bagged random forests: bootstrap sampling per tree plus per-split feature
//! subsampling, deterministic under a fixed seed.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::seed;

use super::tree::{grow_tree, GrowParams, TreeTarget};
use super::{EnsembleKind, HyperParams, ModelTask, TreeEnsembleModel};

/// Fit a bagged forest. Targets are reals for regression and 0-based classes
/// (as reals) for classification; `n_classes` is ignored for regression.
pub fn forest_fit(
    x: &Matrix,
    y: &[f64],
    params: &HyperParams,
    task: ModelTask,
    n_classes: usize,
    seed_value: u64,
) -> Result<TreeEnsembleModel> {
    let HyperParams::Forest { trees, max_depth, min_samples_leaf, feature_fraction } = *params
    else {
        return Err(Error::Invalid("forest_fit requires forest hyper-parameters".into()));
    };
    params.validate()?;
    let n = x.n_rows();
    if n < 2 || n != y.len() {
        return Err(Error::Invalid(format!(
            "forest_fit needs rows(X) = len(y) >= 2, got {n} rows and {} targets",
            y.len()
        )));
    }
    let target = match task {
        ModelTask::Regression => TreeTarget::Regression,
        ModelTask::Classification => TreeTarget::Classification { n_classes },
    };
    let grow = GrowParams { max_depth, min_samples_leaf, feature_fraction };

    // each tree draws from its own derived seed, so parallel growth is
    // byte-identical to sequential
    let fitted: Vec<_> = (0..trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(seed_value, &format!("tree-{t}")));
            let bootstrap: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            grow_tree(x, y, &bootstrap, target, grow, &mut rng)
        })
        .collect();

    Ok(TreeEnsembleModel {
        kind: EnsembleKind::RandomForest,
        task,
        trees: fitted,
        learning_rate: 1.0,
        base_score: 0.0,
        seed: seed_value,
        n_features: x.n_cols(),
        n_classes: if matches!(task, ModelTask::Classification) { n_classes } else { 0 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::model_predict;

    fn forest_params(trees: usize, max_depth: Option<usize>) -> HyperParams {
        HyperParams::Forest { trees, max_depth, min_samples_leaf: 1, feature_fraction: 1.0 }
    }

    #[test]
    fn constant_target_predicts_constant() {
        let x = Matrix::column(&[1.0, 2.0, 3.0, 4.0]);
        let y = [0.7; 4];
        let m = forest_fit(&x, &y, &forest_params(10, None), ModelTask::Regression, 0, 1).unwrap();
        let p = model_predict(&m, &x).unwrap();
        for v in p {
            assert!((v - 0.7).abs() < 1e-12);
        }
    }

    #[test]
    fn separable_classification_reaches_95_percent() {
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..200 {
            let v = (i as f64 - 99.5) / 10.0;
            rows.push(vec![v, (i % 7) as f64]);
            y.push(if v > 0.0 { 1.0 } else { 0.0 });
        }
        let x = Matrix::from_rows(&rows).unwrap();
        let m = forest_fit(&x, &y, &forest_params(10, Some(4)), ModelTask::Classification, 2, 42)
            .unwrap();
        let p = model_predict(&m, &x).unwrap();
        let correct = p.iter().zip(&y).filter(|(a, b)| a == b).count();
        assert!(correct as f64 / 200.0 >= 0.95, "accuracy {}", correct as f64 / 200.0);
    }

    #[test]
    fn same_seed_same_model() {
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..40 {
            rows.push(vec![(i % 13) as f64, (i % 5) as f64]);
            y.push(((i * 7) % 11) as f64 / 10.0);
        }
        let x = Matrix::from_rows(&rows).unwrap();
        let p = forest_params(15, Some(5));
        let a = forest_fit(&x, &y, &p, ModelTask::Regression, 0, 99).unwrap();
        let b = forest_fit(&x, &y, &p, ModelTask::Regression, 0, 99).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        let c = forest_fit(&x, &y, &p, ModelTask::Regression, 0, 100).unwrap();
        assert_ne!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&c).unwrap());
    }

    #[test]
    fn feature_subsampling_stays_deterministic() {
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..60 {
            rows.push(vec![(i % 13) as f64, (i % 7) as f64, (i % 3) as f64]);
            y.push((i % 9) as f64);
        }
        let x = Matrix::from_rows(&rows).unwrap();
        let p = HyperParams::Forest {
            trees: 8,
            max_depth: Some(4),
            min_samples_leaf: 1,
            feature_fraction: 0.3,
        };
        let a = forest_fit(&x, &y, &p, ModelTask::Regression, 0, 5).unwrap();
        let b = forest_fit(&x, &y, &p, ModelTask::Regression, 0, 5).unwrap();
        assert_eq!(model_predict(&a, &x).unwrap(), model_predict(&b, &x).unwrap());
    }
}
