//! Stacked ensemble orchestration: per-featurizer grid search with k-fold
//! cross-validation, top-2 member retention, out-of-fold meta-features, and
//! the meta-model that produces the final prediction.

mod folds;

pub use folds::{kfold_split, FoldAssignment};

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{io_err, Error, Result};
use crate::featurize::FeatureMatrix;
use crate::matrix::Matrix;
use crate::metrics::pearson;
use crate::models::{
    forest_fit, gbt_fit, model_predict, ordinal_fit, ordinal_predict_all, ridge_fit, ridge_predict,
    HyperParams, LossKind, ModelTask, OrdinalFitConfig, OrdinalThresholdModel, RidgeModel,
    TrainedBaseModel,
};
use crate::seed;
use crate::task::{GoldVec, Predictions, TaskKind, TaskSpec};

/// Members retained per featurizer after cross-validation.
pub const MEMBERS_PER_FEATURIZER: usize = 2;

/// Default fold count for every cross-validated selection step.
pub const DEFAULT_FOLDS: usize = 7;

/// Cross-validation outcome of one grid point on one featurizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub featurizer_id: String,
    pub params: HyperParams,
    pub fold_scores: Vec<f64>,
    /// Folds where Pearson was undefined and scored as 0.
    pub degenerate_folds: Vec<bool>,
    pub mean_score: f64,
}

impl CvResult {
    pub fn any_degenerate(&self) -> bool {
        self.degenerate_folds.iter().any(|&d| d)
    }
}

/// One retained base model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleMember {
    pub featurizer_id: String,
    pub params: HyperParams,
    /// Mean CV Pearson that earned this member its slot.
    pub cv_mean: f64,
    pub model: TrainedBaseModel,
}

/// The stacking meta-model: ordinal for ordinal tasks, ridge otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MetaModel {
    Ridge(RidgeModel),
    Ordinal(OrdinalThresholdModel),
}

/// A fully trained stacked ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackedEnsemble {
    pub task: TaskSpec,
    /// Two members per featurizer, in featurizer-declaration order; this is
    /// also the meta-feature column order.
    pub members: Vec<EnsembleMember>,
    pub meta: MetaModel,
    pub fold_seed: u64,
    pub config_fingerprint: String,
}

/// Training configuration: the shared hyper-parameter grid, fold count, and
/// the run seed all randomness derives from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub grid: Vec<HyperParams>,
    pub folds: usize,
    pub seed: u64,
}

impl TrainConfig {
    pub fn new(grid: Vec<HyperParams>, seed: u64) -> TrainConfig {
        TrainConfig { grid, folds: DEFAULT_FOLDS, seed }
    }

    pub fn with_default_grid(task: &TaskSpec, seed: u64) -> TrainConfig {
        TrainConfig::new(default_grid(task), seed)
    }
}

/// Default hyper-parameter grid. Tree families are shared by both task kinds;
/// the linear member is ridge for regression and the all-threshold model for
/// ordinal classification.
pub fn default_grid(task: &TaskSpec) -> Vec<HyperParams> {
    let mut grid = Vec::new();
    for trees in [100, 300] {
        for max_depth in [Some(6), None] {
            for feature_fraction in [0.3, 1.0] {
                grid.push(HyperParams::Forest {
                    trees,
                    max_depth,
                    min_samples_leaf: 1,
                    feature_fraction,
                });
            }
        }
    }
    for rounds in [100, 300] {
        for max_depth in [3, 5] {
            for learning_rate in [0.05, 0.1] {
                grid.push(HyperParams::Gbt {
                    rounds,
                    max_depth,
                    learning_rate,
                    min_samples_leaf: 1,
                });
            }
        }
    }
    match task.kind {
        TaskKind::Regression { .. } => {
            for lambda in [0.01, 0.1, 1.0, 10.0] {
                grid.push(HyperParams::Ridge { lambda });
            }
        }
        TaskKind::Ordinal { .. } => {
            for lambda in [0.1, 1.0, 10.0] {
                for loss in [LossKind::Logistic, LossKind::Squared] {
                    grid.push(HyperParams::Ordinal { lambda, loss });
                }
            }
        }
    }
    grid
}

/// Fit one zoo member on (X, gold) for the given task.
pub fn fit_base(
    params: &HyperParams,
    x: &Matrix,
    gold: &GoldVec,
    task: &TaskSpec,
    seed_value: u64,
) -> Result<TrainedBaseModel> {
    params.validate()?;
    let reals = gold.as_reals();
    match (params, &gold) {
        (HyperParams::Ridge { lambda }, _) => {
            Ok(TrainedBaseModel::Ridge(ridge_fit(x, &reals, *lambda)?))
        }
        (HyperParams::Ordinal { lambda, loss }, GoldVec::Classes(classes, k)) => {
            Ok(TrainedBaseModel::Ordinal(ordinal_fit(
                x,
                classes,
                *k,
                *loss,
                *lambda,
                OrdinalFitConfig::default(),
            )?))
        }
        (HyperParams::Ordinal { .. }, GoldVec::Reals(_)) => {
            Err(Error::Invalid("the ordinal family requires an ordinal task".into()))
        }
        (HyperParams::Forest { .. }, _) => {
            let (model_task, k) = tree_task(task);
            Ok(TrainedBaseModel::Trees(forest_fit(x, &reals, params, model_task, k, seed_value)?))
        }
        (HyperParams::Gbt { .. }, _) => {
            let (model_task, k) = tree_task(task);
            Ok(TrainedBaseModel::Trees(gbt_fit(x, &reals, params, model_task, k, seed_value)?))
        }
    }
}

fn tree_task(task: &TaskSpec) -> (ModelTask, usize) {
    match task.kind {
        TaskKind::Regression { .. } => (ModelTask::Regression, 0),
        TaskKind::Ordinal { .. } => (ModelTask::Classification, task.n_classes()),
    }
}

/// Predict with a base model. Ordinal tasks yield internal classes as reals
/// (linear regressors are rounded and clamped to the class range).
pub fn predict_base(model: &TrainedBaseModel, x: &Matrix, task: &TaskSpec) -> Result<Vec<f64>> {
    match model {
        TrainedBaseModel::Ridge(m) => {
            let raw = ridge_predict(m, x)?;
            match task.kind {
                TaskKind::Regression { .. } => Ok(raw),
                TaskKind::Ordinal { .. } => {
                    let hi = (task.n_classes() - 1) as f64;
                    Ok(raw.into_iter().map(|v| v.round().clamp(0.0, hi)).collect())
                }
            }
        }
        TrainedBaseModel::Ordinal(m) => {
            Ok(ordinal_predict_all(m, x)?.into_iter().map(|c| c as f64).collect())
        }
        TrainedBaseModel::Trees(m) => model_predict(m, x),
    }
}

fn cv_score(pred: &[f64], gold: &[f64]) -> (f64, bool) {
    match pearson(pred, gold) {
        Ok(r) => (r, false),
        // degenerate folds score 0 so the ranking stays total
        Err(_) => (0.0, true),
    }
}

/// Cross-validate every grid point on one feature block and return results
/// sorted by mean Pearson descending; ties keep grid order.
pub fn grid_search(
    values: &Matrix,
    featurizer_id: &str,
    gold: &GoldVec,
    task: &TaskSpec,
    grid: &[HyperParams],
    folds: &FoldAssignment,
    seed_value: u64,
) -> Result<Vec<CvResult>> {
    if grid.is_empty() {
        return Err(Error::Invalid("hyper-parameter grid is empty".into()));
    }
    if values.n_rows() != gold.len() {
        return Err(Error::Invalid(format!(
            "feature rows ({}) do not match gold labels ({})",
            values.n_rows(),
            gold.len()
        )));
    }

    let mut results: Vec<CvResult> = grid
        .par_iter()
        .enumerate()
        .map(|(grid_index, params)| -> Result<CvResult> {
            let mut fold_scores = Vec::with_capacity(folds.k());
            let mut degenerate = Vec::with_capacity(folds.k());
            for fold in 0..folds.k() {
                let train_idx = folds.train_indices(fold);
                let test_idx = folds.test_indices(fold);
                let model = fit_base(
                    params,
                    &values.select_rows(&train_idx),
                    &gold.select(&train_idx),
                    task,
                    seed::derive(seed_value, &format!("cv-{featurizer_id}-g{grid_index}-f{fold}")),
                )?;
                let pred = predict_base(&model, &values.select_rows(&test_idx), task)?;
                let gold_fold = gold.select(&test_idx).as_reals();
                let (score, is_degenerate) = cv_score(&pred, &gold_fold);
                fold_scores.push(score);
                degenerate.push(is_degenerate);
            }
            let mean_score = fold_scores.iter().sum::<f64>() / fold_scores.len() as f64;
            Ok(CvResult {
                featurizer_id: featurizer_id.to_string(),
                params: params.clone(),
                fold_scores,
                degenerate_folds: degenerate,
                mean_score,
            })
        })
        .collect::<Result<_>>()?;

    // stable sort keeps grid order on ties
    results.sort_by(|a, b| b.mean_score.partial_cmp(&a.mean_score).unwrap());
    Ok(results)
}

/// The two best grid points of a sorted result list.
pub fn select_top2(results: &[CvResult]) -> Result<[&CvResult; MEMBERS_PER_FEATURIZER]> {
    if results.len() < MEMBERS_PER_FEATURIZER {
        return Err(Error::Invalid(format!(
            "top-2 selection needs at least 2 candidates, got {}",
            results.len()
        )));
    }
    Ok([&results[0], &results[1]])
}

/// Member identity before refitting: which featurizer and which grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberSpec {
    pub featurizer_id: String,
    pub params: HyperParams,
    pub cv_mean: f64,
}

/// Out-of-fold meta-feature matrix: column `m` holds predictions for each
/// sample from member `m` retrained without that sample's fold.
pub fn build_meta_features(
    members: &[MemberSpec],
    matrices: &BTreeMap<String, Matrix>,
    gold: &GoldVec,
    task: &TaskSpec,
    folds: &FoldAssignment,
    seed_value: u64,
) -> Result<Matrix> {
    let n = gold.len();
    let columns: Vec<Vec<f64>> = members
        .par_iter()
        .enumerate()
        .map(|(member_index, member)| -> Result<Vec<f64>> {
            let values = matrices.get(&member.featurizer_id).ok_or_else(|| {
                Error::Invalid(format!("no feature block for '{}'", member.featurizer_id))
            })?;
            let mut column = vec![0.0; n];
            for fold in 0..folds.k() {
                let train_idx = folds.train_indices(fold);
                let test_idx = folds.test_indices(fold);
                let model = fit_base(
                    &member.params,
                    &values.select_rows(&train_idx),
                    &gold.select(&train_idx),
                    task,
                    seed::derive(seed_value, &format!("oof-m{member_index}-f{fold}")),
                )?;
                let pred = predict_base(&model, &values.select_rows(&test_idx), task)?;
                for (&i, p) in test_idx.iter().zip(pred) {
                    column[i] = p;
                }
            }
            Ok(column)
        })
        .collect::<Result<_>>()?;

    let mut meta = Matrix::zeros(n, members.len());
    for (m, column) in columns.iter().enumerate() {
        for (i, &v) in column.iter().enumerate() {
            meta.set(i, m, v);
        }
    }
    Ok(meta)
}

/// Meta-model regularization grids.
const META_RIDGE_LAMBDAS: [f64; 4] = [0.01, 0.1, 1.0, 10.0];
const META_ORDINAL_LAMBDAS: [f64; 3] = [0.1, 1.0, 10.0];

/// Fit the stacking meta-model on the out-of-fold meta features, selecting
/// the regularization strength with the same folds as everything else.
pub fn fit_stack(
    meta: &Matrix,
    gold: &GoldVec,
    task: &TaskSpec,
    folds: &FoldAssignment,
    seed_value: u64,
) -> Result<MetaModel> {
    if !meta.is_finite() {
        return Err(Error::Invalid("meta-feature matrix contains non-finite values".into()));
    }
    let grid: Vec<HyperParams> = match task.kind {
        TaskKind::Regression { .. } => {
            META_RIDGE_LAMBDAS.iter().map(|&lambda| HyperParams::Ridge { lambda }).collect()
        }
        TaskKind::Ordinal { .. } => META_ORDINAL_LAMBDAS
            .iter()
            .map(|&lambda| HyperParams::Ordinal { lambda, loss: LossKind::Squared })
            .collect(),
    };
    let results = grid_search(meta, "meta", gold, task, &grid, folds, seed_value)?;
    let best = &results[0].params;
    let model = fit_base(best, meta, gold, task, seed::derive(seed_value, "meta-final"))?;
    Ok(match model {
        TrainedBaseModel::Ridge(m) => MetaModel::Ridge(m),
        TrainedBaseModel::Ordinal(m) => MetaModel::Ordinal(m),
        TrainedBaseModel::Trees(_) => unreachable!("meta grid is linear-only"),
    })
}

/// Train the full stacked ensemble over the given feature blocks.
///
/// Returns the ensemble plus every cross-validation result (all featurizers,
/// all grid points, sorted per featurizer).
pub fn train_ensemble(
    features: &[FeatureMatrix],
    gold: &GoldVec,
    task: &TaskSpec,
    config: &TrainConfig,
) -> Result<(StackedEnsemble, Vec<CvResult>)> {
    if features.is_empty() {
        return Err(Error::Invalid("at least one featurizer is required".into()));
    }
    let n = gold.len();
    let first_ids = &features[0].ids;
    for fm in features {
        if fm.n_rows() != n {
            return Err(Error::Invalid(format!(
                "featurizer '{}' has {} rows but there are {n} gold labels",
                fm.featurizer_id,
                fm.n_rows()
            )));
        }
        if &fm.ids != first_ids {
            return Err(Error::Invalid(format!(
                "featurizer '{}' rows are not aligned with '{}'",
                fm.featurizer_id, features[0].featurizer_id
            )));
        }
    }
    let mut seen = std::collections::BTreeSet::new();
    for fm in features {
        if !seen.insert(&fm.featurizer_id) {
            return Err(Error::Invalid(format!("duplicate featurizer id '{}'", fm.featurizer_id)));
        }
    }
    for params in &config.grid {
        params.validate()?;
    }

    let folds = kfold_split(n, config.folds, seed::derive(config.seed, "kfold"))?;

    let mut report: Vec<CvResult> = Vec::new();
    let mut member_specs: Vec<MemberSpec> = Vec::new();
    for fm in features {
        let results = grid_search(
            &fm.values,
            &fm.featurizer_id,
            gold,
            task,
            &config.grid,
            &folds,
            config.seed,
        )?;
        let winners = select_top2(&results)?;
        for w in winners {
            member_specs.push(MemberSpec {
                featurizer_id: fm.featurizer_id.clone(),
                params: w.params.clone(),
                cv_mean: w.mean_score,
            });
        }
        report.extend(results);
    }

    let matrices: BTreeMap<String, Matrix> =
        features.iter().map(|fm| (fm.featurizer_id.clone(), fm.values.clone())).collect();
    let meta = build_meta_features(&member_specs, &matrices, gold, task, &folds, config.seed)?;
    let meta_model = fit_stack(&meta, gold, task, &folds, config.seed)?;

    // refit every retained member on the full training set for inference
    let members: Vec<EnsembleMember> = member_specs
        .par_iter()
        .enumerate()
        .map(|(rank, spec)| -> Result<EnsembleMember> {
            let values = &matrices[&spec.featurizer_id];
            let model = fit_base(
                &spec.params,
                values,
                gold,
                task,
                seed::derive(config.seed, &format!("refit-{}-{rank}", spec.featurizer_id)),
            )?;
            Ok(EnsembleMember {
                featurizer_id: spec.featurizer_id.clone(),
                params: spec.params.clone(),
                cv_mean: spec.cv_mean,
                model,
            })
        })
        .collect::<Result<_>>()?;

    let fingerprint = config_fingerprint(features, task, config);
    let ensemble = StackedEnsemble {
        task: *task,
        members,
        meta: meta_model,
        fold_seed: config.seed,
        config_fingerprint: fingerprint,
    };
    Ok((ensemble, report))
}

fn config_fingerprint(features: &[FeatureMatrix], task: &TaskSpec, config: &TrainConfig) -> String {
    let mut canonical =
        format!("task={};folds={};seed={}", task.label(), config.folds, config.seed);
    for fm in features {
        canonical.push_str(&format!(";feat={}:{}", fm.featurizer_id, fm.dimension()));
    }
    for params in &config.grid {
        canonical.push_str(&format!(";grid={}", params.describe()));
    }
    format!("{:016x}", seed::fingerprint(canonical.as_bytes()))
}

/// Predict with a trained ensemble. `matrices` maps featurizer id to the
/// feature block of the tweets being predicted; all blocks must share one row
/// order.
pub fn predict(
    ensemble: &StackedEnsemble,
    matrices: &BTreeMap<String, FeatureMatrix>,
) -> Result<Predictions> {
    let Some(first) = matrices.values().next() else {
        return Err(Error::Invalid("no feature blocks supplied".into()));
    };
    let ids = &first.ids;
    for fm in matrices.values() {
        if &fm.ids != ids {
            let missing: Vec<String> =
                ids.iter().filter(|id| !fm.ids.contains(id)).cloned().collect();
            return Err(Error::MissingTweetIds {
                featurizer: fm.featurizer_id.clone(),
                ids: if missing.is_empty() { ids.clone() } else { missing },
            });
        }
    }

    let n = ids.len();
    let mut meta = Matrix::zeros(n, ensemble.members.len());
    for (m, member) in ensemble.members.iter().enumerate() {
        let fm = matrices.get(&member.featurizer_id).ok_or_else(|| {
            Error::Invalid(format!("missing feature block for '{}'", member.featurizer_id))
        })?;
        let pred = predict_base(&member.model, &fm.values, &ensemble.task)?;
        for (i, p) in pred.into_iter().enumerate() {
            meta.set(i, m, p);
        }
    }

    match (&ensemble.meta, ensemble.task.kind) {
        (MetaModel::Ridge(model), TaskKind::Regression { lo, hi }) => {
            let raw = ridge_predict(model, &meta)?;
            Ok(Predictions::Reals(raw.into_iter().map(|v| v.clamp(lo, hi)).collect()))
        }
        (MetaModel::Ordinal(model), TaskKind::Ordinal { .. }) => {
            let classes = ordinal_predict_all(model, &meta)?;
            Ok(Predictions::Classes(
                classes.into_iter().map(|c| ensemble.task.external_label(c)).collect(),
            ))
        }
        _ => Err(Error::Invalid("meta-model kind does not match the task".into())),
    }
}

pub const BUNDLE_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct BundleEnvelope {
    format_version: u32,
    ensemble: StackedEnsemble,
}

/// Persist the ensemble as one versioned bundle.
pub fn save_ensemble(ensemble: &StackedEnsemble, path: &Path) -> Result<()> {
    let envelope =
        BundleEnvelope { format_version: BUNDLE_FORMAT_VERSION, ensemble: ensemble.clone() };
    let body = serde_json::to_string_pretty(&envelope)
        .map_err(|e| Error::CorruptPayload(e.to_string()))?;
    std::fs::write(path, body).map_err(|e| io_err(path, e))
}

pub fn load_ensemble(path: &Path) -> Result<StackedEnsemble> {
    let body = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let value: serde_json::Value =
        serde_json::from_str(&body).map_err(|e| Error::CorruptPayload(e.to_string()))?;
    let found = value
        .get("format_version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| Error::CorruptPayload("missing format_version".into()))?
        as u32;
    if found != BUNDLE_FORMAT_VERSION {
        return Err(Error::VersionMismatch { found, supported: BUNDLE_FORMAT_VERSION });
    }
    let envelope: BundleEnvelope =
        serde_json::from_value(value).map_err(|e| Error::CorruptPayload(e.to_string()))?;
    Ok(envelope.ensemble)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::task::Dimension;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn feature_matrix(id: &str, rows: Vec<Vec<f64>>) -> FeatureMatrix {
        let n = rows.len();
        FeatureMatrix {
            featurizer_id: id.to_string(),
            ids: (0..n).map(|i| format!("t{i:03}")).collect(),
            values: Matrix::from_rows(&rows).unwrap(),
        }
    }

    /// Small regression data: y is a noiseless linear readout of a latent
    /// signal, with each featurizer a different noisy view.
    fn synthetic_regression(n: usize, seed_value: u64) -> (Vec<FeatureMatrix>, GoldVec) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed_value);
        let latent: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
        let make = |rng: &mut ChaCha8Rng, noise: f64, id: &str| {
            let rows: Vec<Vec<f64>> = latent
                .iter()
                .map(|&z| vec![z + rng.random_range(-noise..noise), rng.random_range(-1.0..1.0)])
                .collect();
            feature_matrix(id, rows)
        };
        let fms = vec![make(&mut rng, 0.05, "alpha"), make(&mut rng, 0.1, "beta")];
        (fms, GoldVec::Reals(latent))
    }

    fn small_grid() -> Vec<HyperParams> {
        vec![
            HyperParams::Ridge { lambda: 0.1 },
            HyperParams::Ridge { lambda: 10.0 },
            HyperParams::Gbt { rounds: 20, max_depth: 3, learning_rate: 0.2, min_samples_leaf: 1 },
        ]
    }

    #[test]
    fn grid_of_one_gives_one_result_with_k_folds() {
        let (fms, gold) = synthetic_regression(30, 1);
        let folds = kfold_split(30, 7, 0).unwrap();
        let task = TaskSpec::v_reg();
        let grid = vec![HyperParams::Ridge { lambda: 0.1 }];
        let results = grid_search(&fms[0].values, "alpha", &gold, &task, &grid, &folds, 0).unwrap();
        assert_eq!(results.len(), 1);
        assert_eq!(results[0].fold_scores.len(), 7);
    }

    #[test]
    fn perfect_feature_scores_near_one() {
        let (fms, gold) = synthetic_regression(40, 2);
        // replace with a perfectly predictive single column
        let latent = gold.as_reals();
        let perfect = feature_matrix("perfect", latent.iter().map(|&z| vec![z]).collect());
        let folds = kfold_split(40, 7, 0).unwrap();
        let task = TaskSpec::v_reg();
        let results = grid_search(
            &perfect.values,
            "perfect",
            &gold,
            &task,
            &[HyperParams::Ridge { lambda: 0.01 }],
            &folds,
            0,
        )
        .unwrap();
        assert!(results[0].mean_score >= 0.99, "{}", results[0].mean_score);
        let _ = fms;
    }

    #[test]
    fn identical_grid_points_keep_order() {
        let (fms, gold) = synthetic_regression(25, 3);
        let folds = kfold_split(25, 7, 0).unwrap();
        let task = TaskSpec::v_reg();
        let grid = vec![
            HyperParams::Ridge { lambda: 0.5 },
            HyperParams::Ridge { lambda: 0.5 },
            HyperParams::Ridge { lambda: 0.5 },
        ];
        let results = grid_search(&fms[0].values, "alpha", &gold, &task, &grid, &folds, 0).unwrap();
        assert_eq!(results[0].mean_score, results[1].mean_score);
        assert_eq!(results[1].mean_score, results[2].mean_score);
    }

    #[test]
    fn select_top2_orders_by_score() {
        let mk = |score: f64| CvResult {
            featurizer_id: "x".into(),
            params: HyperParams::Ridge { lambda: score },
            fold_scores: vec![score],
            degenerate_folds: vec![false],
            mean_score: score,
        };
        let mut results = vec![mk(0.5), mk(0.7), mk(0.6)];
        results.sort_by(|a, b| b.mean_score.partial_cmp(&a.mean_score).unwrap());
        let winners = select_top2(&results).unwrap();
        assert_eq!(winners[0].mean_score, 0.7);
        assert_eq!(winners[1].mean_score, 0.6);
        assert!(select_top2(&results[..1]).is_err());
    }

    #[test]
    fn second_place_tie_keeps_grid_order() {
        // two zero-learning-rate boosters predict the training mean, so both
        // score exactly 0 (degenerate) and tie for second place; the earlier
        // grid entry must win the slot
        let (fms, gold) = synthetic_regression(25, 9);
        let folds = kfold_split(25, 7, 0).unwrap();
        let task = TaskSpec::v_reg();
        let grid = vec![
            HyperParams::Ridge { lambda: 0.1 },
            HyperParams::Gbt { rounds: 1, max_depth: 1, learning_rate: 0.0, min_samples_leaf: 1 },
            HyperParams::Gbt { rounds: 2, max_depth: 1, learning_rate: 0.0, min_samples_leaf: 1 },
        ];
        let results = grid_search(&fms[0].values, "alpha", &gold, &task, &grid, &folds, 0).unwrap();
        let winners = select_top2(&results).unwrap();
        assert!(matches!(winners[0].params, HyperParams::Ridge { .. }));
        assert_eq!(winners[1].mean_score, results[2].mean_score);
        assert!(
            matches!(winners[1].params, HyperParams::Gbt { rounds: 1, .. }),
            "tie at second place must keep the earlier grid entry, got {:?}",
            winners[1].params
        );
    }

    #[test]
    fn degenerate_fold_scores_zero_with_flag() {
        // constant gold makes every fold's Pearson undefined
        let rows: Vec<Vec<f64>> = (0..14).map(|i| vec![i as f64]).collect();
        let fm = feature_matrix("c", rows);
        let gold = GoldVec::Reals(vec![0.5; 14]);
        let folds = kfold_split(14, 7, 0).unwrap();
        let task = TaskSpec::v_reg();
        let results = grid_search(
            &fm.values,
            "c",
            &gold,
            &task,
            &[HyperParams::Ridge { lambda: 1.0 }],
            &folds,
            0,
        )
        .unwrap();
        assert_eq!(results[0].mean_score, 0.0);
        assert!(results[0].any_degenerate());
    }

    #[test]
    fn meta_features_are_out_of_fold() {
        // leakage audit: corrupt the held-out fold's gold before training;
        // if the OOF column changes, the fold leaked into its own predictor
        let (fms, gold) = synthetic_regression(21, 4);
        let folds = kfold_split(21, 7, 0).unwrap();
        let task = TaskSpec::v_reg();
        let spec = MemberSpec {
            featurizer_id: "alpha".into(),
            params: HyperParams::Ridge { lambda: 0.1 },
            cv_mean: 0.0,
        };
        let matrices: BTreeMap<String, Matrix> =
            fms.iter().map(|fm| (fm.featurizer_id.clone(), fm.values.clone())).collect();
        let meta =
            build_meta_features(std::slice::from_ref(&spec), &matrices, &gold, &task, &folds, 9)
                .unwrap();

        let base = gold.as_reals();
        for fold in 0..folds.k() {
            let mut corrupted = base.clone();
            for i in folds.test_indices(fold) {
                corrupted[i] = 9999.0;
            }
            let meta_corrupted = build_meta_features(
                std::slice::from_ref(&spec),
                &matrices,
                &GoldVec::Reals(corrupted),
                &task,
                &folds,
                9,
            )
            .unwrap();
            for i in folds.test_indices(fold) {
                assert_eq!(
                    meta.get(i, 0),
                    meta_corrupted.get(i, 0),
                    "fold {fold} prediction for sample {i} depends on its own fold's gold"
                );
            }
        }
    }

    #[test]
    fn constant_member_gives_constant_column() {
        let rows: Vec<Vec<f64>> = (0..14).map(|_| vec![1.0]).collect();
        let fm = feature_matrix("const", rows);
        let gold = GoldVec::Reals((0..14).map(|i| i as f64 / 13.0).collect());
        let folds = kfold_split(14, 7, 0).unwrap();
        let task = TaskSpec::v_reg();
        let spec = MemberSpec {
            featurizer_id: "const".into(),
            params: HyperParams::Ridge { lambda: 1.0 },
            cv_mean: 0.0,
        };
        let matrices: BTreeMap<String, Matrix> =
            [("const".to_string(), fm.values.clone())].into_iter().collect();
        let meta = build_meta_features(&[spec], &matrices, &gold, &task, &folds, 0).unwrap();
        // constant features make each fold model predict its own training
        // mean; every value must be finite and near the target mean
        for i in 0..14 {
            assert!((meta.get(i, 0) - 0.5).abs() < 0.1);
        }
    }

    #[test]
    fn identity_meta_column_stacks_to_identity() {
        let gold = GoldVec::Reals((0..28).map(|i| i as f64 / 27.0).collect());
        let meta = Matrix::from_rows(&gold.as_reals().iter().map(|&v| vec![v]).collect::<Vec<_>>())
            .unwrap();
        let folds = kfold_split(28, 7, 0).unwrap();
        let task = TaskSpec::v_reg();
        let model = fit_stack(&meta, &gold, &task, &folds, 0).unwrap();
        let MetaModel::Ridge(ridge) = &model else { panic!("expected ridge meta") };
        let pred = ridge_predict(ridge, &meta).unwrap();
        let r = pearson(&pred, &gold.as_reals()).unwrap();
        assert!(r > 0.999, "{r}");
    }

    #[test]
    fn constant_meta_columns_degenerate_to_constant_prediction() {
        let n = 21;
        let gold = GoldVec::Reals((0..n).map(|i| i as f64 / (n - 1) as f64).collect());
        let meta = Matrix::from_rows(&vec![vec![0.5, 0.5]; n]).unwrap();
        let folds = kfold_split(n, 7, 0).unwrap();
        let task = TaskSpec::v_reg();
        let model = fit_stack(&meta, &gold, &task, &folds, 0).unwrap();
        let MetaModel::Ridge(ridge) = &model else { panic!("expected ridge meta") };
        let pred = ridge_predict(ridge, &meta).unwrap();
        let mean = 0.5;
        for p in pred {
            assert!((p - mean).abs() < 1e-9, "constant meta must predict the target mean, got {p}");
        }
    }

    #[test]
    fn complementary_noisy_columns_stack_at_least_as_well() {
        // two views of the target with independent noise: the stack's CV
        // Pearson must not trail the best single column by more than 0.02
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let n = 140;
        let gold_values: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
        let col_a: Vec<f64> =
            gold_values.iter().map(|&z| z + rng.random_range(-0.25..0.25)).collect();
        let col_b: Vec<f64> =
            gold_values.iter().map(|&z| z + rng.random_range(-0.25..0.25)).collect();
        let gold = GoldVec::Reals(gold_values);
        let task = TaskSpec::v_reg();
        let folds = kfold_split(n, 7, 1).unwrap();
        let grid = [HyperParams::Ridge { lambda: 1.0 }];

        let score_of = |columns: &[&[f64]]| -> f64 {
            let rows: Vec<Vec<f64>> =
                (0..n).map(|i| columns.iter().map(|c| c[i]).collect()).collect();
            let values = Matrix::from_rows(&rows).unwrap();
            grid_search(&values, "m", &gold, &task, &grid, &folds, 5).unwrap()[0].mean_score
        };
        let single_a = score_of(&[&col_a]);
        let single_b = score_of(&[&col_b]);
        let stacked = score_of(&[&col_a, &col_b]);
        let best_single = single_a.max(single_b);
        assert!(
            stacked >= best_single - 0.02,
            "stacked {stacked:.4} trails best single {best_single:.4}"
        );
    }

    #[test]
    fn predict_with_missing_rows_lists_ids() {
        let (fms, gold) = synthetic_regression(30, 14);
        let task = TaskSpec::v_reg();
        let config = TrainConfig::new(small_grid(), 4);
        let (ensemble, _) = train_ensemble(&fms, &gold, &task, &config).unwrap();
        let mut matrices: BTreeMap<String, FeatureMatrix> =
            fms.iter().map(|fm| (fm.featurizer_id.clone(), fm.clone())).collect();
        // drop one tweet's row from a single featurizer
        let beta = matrices.get_mut("beta").unwrap();
        let keep: Vec<usize> = (1..beta.ids.len()).collect();
        beta.values = beta.values.select_rows(&keep);
        beta.ids.remove(0);
        match predict(&ensemble, &matrices).unwrap_err() {
            Error::MissingTweetIds { featurizer, ids } => {
                assert_eq!(featurizer, "beta");
                assert_eq!(ids, vec!["t000".to_string()]);
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn train_ensemble_structure_and_order() {
        let (fms, gold) = synthetic_regression(40, 5);
        let task = TaskSpec::v_reg();
        let config = TrainConfig::new(small_grid(), 11);
        let (ensemble, report) = train_ensemble(&fms, &gold, &task, &config).unwrap();
        assert_eq!(ensemble.members.len(), 2 * fms.len());
        assert_eq!(ensemble.members[0].featurizer_id, "alpha");
        assert_eq!(ensemble.members[1].featurizer_id, "alpha");
        assert_eq!(ensemble.members[2].featurizer_id, "beta");
        assert_eq!(report.len(), small_grid().len() * fms.len());
        // within a featurizer, results are sorted by mean score
        assert!(report[0].mean_score >= report[1].mean_score);
    }

    #[test]
    fn train_twice_is_identical() {
        let (fms, gold) = synthetic_regression(35, 6);
        let task = TaskSpec::v_reg();
        let config = TrainConfig::new(small_grid(), 7);
        let (a, _) = train_ensemble(&fms, &gold, &task, &config).unwrap();
        let (b, _) = train_ensemble(&fms, &gold, &task, &config).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn predict_regression_clamps_and_orders() {
        let (fms, gold) = synthetic_regression(40, 8);
        let task = TaskSpec::v_reg();
        let config = TrainConfig::new(small_grid(), 3);
        let (ensemble, _) = train_ensemble(&fms, &gold, &task, &config).unwrap();
        let matrices: BTreeMap<String, FeatureMatrix> =
            fms.iter().map(|fm| (fm.featurizer_id.clone(), fm.clone())).collect();
        let Predictions::Reals(pred) = predict(&ensemble, &matrices).unwrap() else {
            panic!("regression task must yield reals");
        };
        assert_eq!(pred.len(), 40);
        for p in &pred {
            assert!((0.0..=1.0).contains(p));
        }
        let r = pearson(&pred, &gold.as_reals()).unwrap();
        assert!(r > 0.9, "{r}");
    }

    #[test]
    fn ordinal_pipeline_end_to_end() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let n = 56;
        let latent: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let rows: Vec<Vec<f64>> =
            latent.iter().map(|&z| vec![z + rng.random_range(-0.2..0.2)]).collect();
        let fm = feature_matrix("sig", rows);
        let task = TaskSpec::v_oc();
        let classes: Vec<usize> =
            latent.iter().map(|&z| (z.round().clamp(-3.0, 3.0) + 3.0) as usize).collect();
        let gold = GoldVec::Classes(classes, 7);
        let grid = vec![
            HyperParams::Ordinal { lambda: 0.1, loss: LossKind::Squared },
            HyperParams::Ordinal { lambda: 1.0, loss: LossKind::Squared },
        ];
        let config = TrainConfig::new(grid, 21);
        let (ensemble, _) =
            train_ensemble(std::slice::from_ref(&fm), &gold, &task, &config).unwrap();
        let matrices: BTreeMap<String, FeatureMatrix> =
            [("sig".to_string(), fm)].into_iter().collect();
        let Predictions::Classes(pred) = predict(&ensemble, &matrices).unwrap() else {
            panic!("ordinal task must yield classes");
        };
        for label in &pred {
            assert!((-3..=3).contains(label));
        }
        // internal class 6 maps to +3 etc.
        assert_eq!(ensemble.task.external_label(6), 3);
        let pred_real: Vec<f64> = pred.iter().map(|&v| v as f64).collect();
        let gold_real: Vec<f64> = latent.iter().map(|z| z.round().clamp(-3.0, 3.0)).collect();
        let r = pearson(&pred_real, &gold_real).unwrap();
        assert!(r > 0.8, "{r}");
    }

    #[test]
    fn bundle_roundtrip_and_version_gate() {
        let (fms, gold) = synthetic_regression(30, 12);
        let task = TaskSpec::v_reg();
        let config = TrainConfig::new(small_grid(), 2);
        let (ensemble, _) = train_ensemble(&fms, &gold, &task, &config).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bundle.json");
        save_ensemble(&ensemble, &path).unwrap();
        let loaded = load_ensemble(&path).unwrap();
        assert_eq!(ensemble, loaded);

        let body = std::fs::read_to_string(&path)
            .unwrap()
            .replace("\"format_version\": 1", "\"format_version\": 5");
        std::fs::write(&path, body).unwrap();
        assert!(matches!(
            load_ensemble(&path).unwrap_err(),
            Error::VersionMismatch { found: 5, .. }
        ));
    }

    #[test]
    fn misaligned_feature_rows_rejected() {
        let (mut fms, gold) = synthetic_regression(20, 13);
        fms[1].ids.swap(0, 1);
        let task = TaskSpec::v_reg();
        let config = TrainConfig::new(small_grid(), 2);
        assert!(train_ensemble(&fms, &gold, &task, &config).is_err());
    }

    #[test]
    fn default_grid_matches_documented_sizes() {
        let reg = default_grid(&TaskSpec::v_reg());
        // 8 forest + 8 gbt + 4 ridge
        assert_eq!(reg.len(), 20);
        let ord = default_grid(&TaskSpec::ei_oc(Dimension::Joy));
        // 8 forest + 8 gbt + 6 ordinal
        assert_eq!(ord.len(), 22);
    }
}
