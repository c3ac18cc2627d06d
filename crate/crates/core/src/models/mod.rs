//! The model zoo: ridge regression, all-threshold ordinal regression, bagged
//! forests, and gradient-boosted trees, plus versioned model persistence.

mod forest;
mod gbt;
mod ordinal;
mod ridge;
mod tree;

pub use forest::forest_fit;
pub use gbt::gbt_fit;
pub use ordinal::{
    ordinal_fit, ordinal_gradient, ordinal_objective, ordinal_predict, ordinal_predict_all,
    LossKind, OrdinalFitConfig, OrdinalThresholdModel,
};
pub use ridge::{ridge_fit, ridge_objective, ridge_predict, RidgeModel};
pub use tree::{fit_regression_tree, DecisionTree, Node};

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{io_err, Error, Result};
use crate::matrix::Matrix;

use tree::argmax_lowest;

/// Tree ensemble flavor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleKind {
    RandomForest,
    GradientBoosted,
}

/// What a tree ensemble predicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelTask {
    Regression,
    Classification,
}

/// A fitted tree ensemble. Forest regression averages trees; forest
/// classification sums leaf votes; boosting adds `base_score +
/// learning_rate * sum(trees)` and, for classification, rounds and clamps to
/// the class range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeEnsembleModel {
    pub kind: EnsembleKind,
    pub task: ModelTask,
    pub(crate) trees: Vec<DecisionTree>,
    pub learning_rate: f64,
    pub base_score: f64,
    pub seed: u64,
    pub n_features: usize,
    /// 0 for regression models.
    pub n_classes: usize,
}

impl TreeEnsembleModel {
    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }
}

/// Predictions using only the first `n_trees` trees; classification outputs
/// are class indices as reals with ties resolved to the lower class.
pub fn staged_predictions(
    model: &TreeEnsembleModel,
    x: &Matrix,
    n_trees: usize,
) -> Result<Vec<f64>> {
    if x.n_cols() != model.n_features {
        return Err(Error::DimensionMismatch { expected: model.n_features, got: x.n_cols() });
    }
    if n_trees > model.trees.len() {
        return Err(Error::Invalid(format!(
            "requested {n_trees} trees but the model has {}",
            model.trees.len()
        )));
    }
    let trees = &model.trees[..n_trees];
    match (model.kind, model.task) {
        (EnsembleKind::GradientBoosted, task) => {
            let raw = x.rows().map(|row| {
                model.base_score
                    + model.learning_rate * trees.iter().map(|t| t.predict_real(row)).sum::<f64>()
            });
            match task {
                ModelTask::Regression => Ok(raw.collect()),
                ModelTask::Classification => {
                    let hi = model.n_classes.saturating_sub(1) as f64;
                    Ok(raw.map(|v| v.round().clamp(0.0, hi)).collect())
                }
            }
        }
        (EnsembleKind::RandomForest, ModelTask::Regression) => {
            if trees.is_empty() {
                return Err(Error::Invalid("a forest needs at least one tree".into()));
            }
            Ok(x.rows()
                .map(|row| {
                    trees.iter().map(|t| t.predict_real(row)).sum::<f64>() / trees.len() as f64
                })
                .collect())
        }
        (EnsembleKind::RandomForest, ModelTask::Classification) => {
            if trees.is_empty() {
                return Err(Error::Invalid("a forest needs at least one tree".into()));
            }
            Ok(x.rows()
                .map(|row| {
                    let mut votes = vec![0.0; model.n_classes];
                    for t in trees {
                        t.add_votes(row, &mut votes);
                    }
                    argmax_lowest(&votes) as f64
                })
                .collect())
        }
    }
}

/// Predict with the full ensemble.
pub fn model_predict(model: &TreeEnsembleModel, x: &Matrix) -> Result<Vec<f64>> {
    staged_predictions(model, x, model.trees.len())
}

/// Hyper-parameters for one zoo member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum HyperParams {
    Forest {
        trees: usize,
        #[serde(default)]
        max_depth: Option<usize>,
        #[serde(default = "default_min_leaf")]
        min_samples_leaf: usize,
        #[serde(default = "default_fraction")]
        feature_fraction: f64,
    },
    Gbt {
        rounds: usize,
        max_depth: usize,
        learning_rate: f64,
        #[serde(default = "default_min_leaf")]
        min_samples_leaf: usize,
    },
    Ridge {
        lambda: f64,
    },
    Ordinal {
        lambda: f64,
        loss: LossKind,
    },
}

fn default_min_leaf() -> usize {
    1
}

fn default_fraction() -> f64 {
    1.0
}

impl HyperParams {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Invalid(msg));
        match *self {
            HyperParams::Forest { trees, max_depth, min_samples_leaf, feature_fraction } => {
                if trees == 0 || min_samples_leaf == 0 || max_depth == Some(0) {
                    return fail(format!("forest counts must be positive: {self:?}"));
                }
                if !(feature_fraction > 0.0 && feature_fraction <= 1.0) {
                    return fail(format!("feature_fraction must be in (0, 1]: {feature_fraction}"));
                }
            }
            HyperParams::Gbt { rounds, max_depth, learning_rate, min_samples_leaf } => {
                if rounds == 0 || max_depth == 0 || min_samples_leaf == 0 {
                    return fail(format!("gbt counts must be positive: {self:?}"));
                }
                if !(learning_rate >= 0.0 && learning_rate.is_finite()) {
                    return fail(format!("learning_rate must be finite and >= 0: {learning_rate}"));
                }
            }
            HyperParams::Ridge { lambda } | HyperParams::Ordinal { lambda, .. } => {
                if !(lambda >= 0.0 && lambda.is_finite()) {
                    return fail(format!("lambda must be finite and >= 0: {lambda}"));
                }
            }
        }
        Ok(())
    }

    /// Stable one-line description used in CV reports and fingerprints.
    pub fn describe(&self) -> String {
        match self {
            HyperParams::Forest { trees, max_depth, min_samples_leaf, feature_fraction } => {
                let depth =
                    max_depth.map_or_else(|| "none".to_string(), |d| d.to_string());
                format!(
                    "forest(trees={trees},max_depth={depth},min_leaf={min_samples_leaf},feat_frac={feature_fraction})"
                )
            }
            HyperParams::Gbt { rounds, max_depth, learning_rate, min_samples_leaf } => format!(
                "gbt(rounds={rounds},max_depth={max_depth},lr={learning_rate},min_leaf={min_samples_leaf})"
            ),
            HyperParams::Ridge { lambda } => format!("ridge(lambda={lambda})"),
            HyperParams::Ordinal { lambda, loss } => {
                format!("ordinal(lambda={lambda},loss={})", loss.name())
            }
        }
    }
}

/// Any fitted member of the zoo.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TrainedBaseModel {
    Ridge(RidgeModel),
    Ordinal(OrdinalThresholdModel),
    Trees(TreeEnsembleModel),
}

impl TrainedBaseModel {
    pub fn n_features(&self) -> usize {
        match self {
            TrainedBaseModel::Ridge(m) => m.weights.len(),
            TrainedBaseModel::Ordinal(m) => m.weights.len(),
            TrainedBaseModel::Trees(m) => m.n_features,
        }
    }

    pub fn n_classes(&self) -> usize {
        match self {
            TrainedBaseModel::Ridge(_) => 0,
            TrainedBaseModel::Ordinal(m) => m.n_classes,
            TrainedBaseModel::Trees(m) => m.n_classes,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            TrainedBaseModel::Ridge(_) => "ridge",
            TrainedBaseModel::Ordinal(_) => "ordinal",
            TrainedBaseModel::Trees(m) => match m.kind {
                EnsembleKind::RandomForest => "random_forest",
                EnsembleKind::GradientBoosted => "gradient_boosted",
            },
        }
    }
}

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelEnvelope {
    format_version: u32,
    kind: String,
    n_features: usize,
    n_classes: usize,
    model: TrainedBaseModel,
}

/// Write a model as a self-describing, versioned JSON document.
pub fn save_model(model: &TrainedBaseModel, path: &Path) -> Result<()> {
    let envelope = ModelEnvelope {
        format_version: MODEL_FORMAT_VERSION,
        kind: model.kind_name().to_string(),
        n_features: model.n_features(),
        n_classes: model.n_classes(),
        model: model.clone(),
    };
    let body = serde_json::to_string_pretty(&envelope)
        .map_err(|e| Error::CorruptPayload(e.to_string()))?;
    std::fs::write(path, body).map_err(|e| io_err(path, e))
}

/// Load a model saved by [`save_model`], rejecting unknown format versions
/// and corrupt payloads.
pub fn load_model(path: &Path) -> Result<TrainedBaseModel> {
    let body = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let value: serde_json::Value =
        serde_json::from_str(&body).map_err(|e| Error::CorruptPayload(e.to_string()))?;
    let found = value
        .get("format_version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| Error::CorruptPayload("missing format_version".into()))?
        as u32;
    if found != MODEL_FORMAT_VERSION {
        return Err(Error::VersionMismatch { found, supported: MODEL_FORMAT_VERSION });
    }
    let envelope: ModelEnvelope =
        serde_json::from_value(value).map_err(|e| Error::CorruptPayload(e.to_string()))?;
    Ok(envelope.model)
}
