//! The train / predict / evaluate drivers. Every failure is tagged with the
//! stage it came from.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use affect_core::ensemble::{
    load_ensemble, predict, save_ensemble, train_ensemble, CvResult, StackedEnsemble, TrainConfig,
};
use affect_core::featurize::{
    featurize_dataset, load_embedding_table, load_lexicon, FeatureMatrix, Featurizer,
};
use affect_core::metrics::{evaluate, EvalReport};
use affect_core::preprocess::{load_emoji_map, process_all, EmojiMap, ProcessedTweet};
use affect_core::task::{Gold, GoldVec, Predictions, TaskKind, TaskSpec};

use crate::dataset::{parse_dataset, read_predictions, write_predictions, Dataset};
use crate::manifest::RunManifest;

/// Artifacts produced by a training run.
#[derive(Debug)]
pub struct TrainOutcome {
    pub ensemble: StackedEnsemble,
    pub cv_results: Vec<CvResult>,
    pub ensemble_path: PathBuf,
    pub report_path: PathBuf,
}

fn stage<T>(name: &'static str, r: Result<T>) -> Result<T> {
    r.with_context(|| format!("stage {name} failed"))
}

fn check_dimension(dataset: &Dataset, task: &TaskSpec) -> Result<()> {
    let expected = task.dimension.name();
    let offending: Vec<&str> = dataset
        .tweets
        .iter()
        .filter(|t| !t.dimension.eq_ignore_ascii_case(expected))
        .map(|t| t.dimension.as_str())
        .collect();
    if !offending.is_empty() {
        bail!(
            "task mismatch: task dimension is '{expected}' but the data carries '{}'",
            offending[0]
        );
    }
    Ok(())
}

fn load_emoji(manifest: &RunManifest, base: &Path) -> Result<EmojiMap> {
    match &manifest.preprocess.emoji_map {
        Some(path) => Ok(load_emoji_map(&manifest.resolve(base, path))?),
        None => Ok(EmojiMap::empty()),
    }
}

/// Build every declared featurizer: one lexicon featurizer when any lexicons
/// are configured, plus one per embedding table.
fn build_featurizers(manifest: &RunManifest, base: &Path) -> Result<Vec<Featurizer>> {
    let mut featurizers = Vec::new();
    if !manifest.featurizers.lexicons.is_empty() {
        let mut lexicons = Vec::new();
        for decl in &manifest.featurizers.lexicons {
            let path = manifest.resolve(base, &decl.path);
            lexicons.push(load_lexicon(&path, decl.kind()?, &decl.name)?);
        }
        featurizers
            .push(Featurizer::Lexicon { id: manifest.featurizers.lexicon_id.clone(), lexicons });
    }
    for decl in &manifest.featurizers.embeddings {
        let path = manifest.resolve(base, &decl.path);
        let expected = match decl.dim {
            Some(d) => d,
            None => peek_embedding_dim(&path)?,
        };
        featurizers.push(Featurizer::Embedding(load_embedding_table(&path, expected)?));
    }
    Ok(featurizers)
}

fn peek_embedding_dim(path: &Path) -> Result<usize> {
    let body = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read embedding table '{}'", path.display()))?;
    let header = body.lines().next().unwrap_or_default();
    let dim = header
        .split_whitespace()
        .nth(1)
        .and_then(|d| d.parse().ok())
        .with_context(|| format!("'{}' has no '<id> <dim>' header", path.display()))?;
    Ok(dim)
}

fn featurize_all(
    featurizers: &[Featurizer],
    tweets: &[ProcessedTweet],
) -> Result<Vec<FeatureMatrix>> {
    featurizers.iter().map(|f| Ok(featurize_dataset(tweets, f)?)).collect()
}

fn gold_vec(dataset: &Dataset, task: &TaskSpec) -> Result<GoldVec> {
    let gold = dataset.gold_required()?;
    match task.kind {
        TaskKind::Regression { .. } => {
            let values = gold
                .iter()
                .map(|g| match g {
                    Gold::Intensity(v) => Ok(*v),
                    Gold::Class(_) => bail!("ordinal gold under a regression task"),
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(GoldVec::Reals(values))
        }
        TaskKind::Ordinal { .. } => {
            let classes = gold
                .iter()
                .map(|g| match g {
                    Gold::Class(c) => Ok(task.internal_class(*c)?),
                    Gold::Intensity(_) => bail!("real-valued gold under an ordinal task"),
                })
                .collect::<Result<Vec<usize>>>()?;
            Ok(GoldVec::Classes(classes, task.n_classes()))
        }
    }
}

/// Render the CV report: one row per (featurizer, grid point) with the mean
/// and per-fold Pearson scores.
fn render_cv_report(results: &[CvResult], ensemble: &StackedEnsemble) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# task: {}", ensemble.task.label());
    let _ = writeln!(out, "# fold_seed: {}", ensemble.fold_seed);
    let _ = writeln!(out, "# config_fingerprint: {}", ensemble.config_fingerprint);
    let _ = writeln!(out, "featurizer\tparams\tmean_pearson\tfold_scores\tdegenerate_folds");
    for r in results {
        let folds: Vec<String> = r.fold_scores.iter().map(|s| format!("{s:.6}")).collect();
        let degenerate: Vec<String> =
            r.degenerate_folds.iter().map(|d| if *d { "1" } else { "0" }.to_string()).collect();
        let _ = writeln!(
            out,
            "{}\t{}\t{:.6}\t{}\t{}",
            r.featurizer_id,
            r.params.describe(),
            r.mean_score,
            folds.join(","),
            degenerate.join(",")
        );
    }
    out
}

/// Run the full training pipeline and persist the ensemble bundle plus the
/// CV report.
pub fn cmd_train(manifest: &RunManifest, base: &Path) -> Result<TrainOutcome> {
    stage("manifest", manifest.validate(base))?;
    let task = stage("manifest", manifest.task_spec())?;

    let dataset = stage(
        "ingest",
        (|| -> Result<Dataset> {
            let mut ds = parse_dataset(&manifest.resolve(base, &manifest.data.train), &task)?;
            if manifest.data.merge_dev {
                let Some(dev_path) = &manifest.data.dev else {
                    bail!("merge_dev is set but no dev set is declared");
                };
                let dev = parse_dataset(&manifest.resolve(base, dev_path), &task)?;
                for t in dev.tweets {
                    if ds.tweets.iter().any(|existing| existing.id == t.id) {
                        bail!("dev tweet id '{}' duplicates a training id", t.id);
                    }
                    ds.tweets.push(t);
                }
            }
            check_dimension(&ds, &task)?;
            Ok(ds)
        })(),
    )?;

    let processed = stage(
        "preprocess",
        (|| -> Result<Vec<ProcessedTweet>> {
            let map = load_emoji(manifest, base)?;
            Ok(process_all(&dataset.tweets, &map))
        })(),
    )?;

    let features = stage(
        "featurize",
        (|| -> Result<Vec<FeatureMatrix>> {
            let featurizers = build_featurizers(manifest, base)?;
            featurize_all(&featurizers, &processed)
        })(),
    )?;

    let (ensemble, cv_results) = stage(
        "train",
        (|| -> Result<_> {
            let gold = gold_vec(&dataset, &task)?;
            let grid = if manifest.grid.is_empty() {
                affect_core::ensemble::default_grid(&task)
            } else {
                manifest.grid.clone()
            };
            let config = TrainConfig { grid, folds: manifest.run.folds, seed: manifest.run.seed };
            Ok(train_ensemble(&features, &gold, &task, &config)?)
        })(),
    )?;

    let (ensemble_path, report_path) = stage(
        "persist",
        (|| -> Result<_> {
            let out_dir = manifest.resolve(base, &manifest.run.out_dir);
            std::fs::create_dir_all(&out_dir)
                .with_context(|| format!("cannot create '{}'", out_dir.display()))?;
            let ensemble_path = out_dir.join("ensemble.json");
            save_ensemble(&ensemble, &ensemble_path)?;
            let report_path = out_dir.join("cv_report.tsv");
            std::fs::write(&report_path, render_cv_report(&cv_results, &ensemble))
                .with_context(|| format!("cannot write '{}'", report_path.display()))?;
            Ok((ensemble_path, report_path))
        })(),
    )?;

    Ok(TrainOutcome { ensemble, cv_results, ensemble_path, report_path })
}

/// Predict a dataset with a persisted ensemble, writing one row per tweet in
/// input order.
pub fn cmd_predict(
    model_path: &Path,
    data_path: &Path,
    out_path: &Path,
    manifest: &RunManifest,
    base: &Path,
) -> Result<Predictions> {
    let ensemble = stage("load", Ok(load_ensemble(model_path)?))?;
    let task = ensemble.task;

    let dataset = stage(
        "ingest",
        (|| -> Result<Dataset> {
            let ds = parse_dataset(data_path, &task)?;
            check_dimension(&ds, &task)?;
            Ok(ds)
        })(),
    )?;

    let processed = stage(
        "preprocess",
        (|| -> Result<Vec<ProcessedTweet>> {
            let map = load_emoji(manifest, base)?;
            Ok(process_all(&dataset.tweets, &map))
        })(),
    )?;

    let matrices = stage(
        "featurize",
        (|| -> Result<BTreeMap<String, FeatureMatrix>> {
            let featurizers = build_featurizers(manifest, base)?;
            let mut matrices = BTreeMap::new();
            for f in &featurizers {
                let fm = featurize_dataset(&processed, f)?;
                matrices.insert(fm.featurizer_id.clone(), fm);
            }
            Ok(matrices)
        })(),
    )?;

    let predictions = stage("predict", Ok(predict(&ensemble, &matrices)?))?;
    stage("persist", Ok(write_predictions(out_path, &dataset.tweets, &predictions)?))?;
    Ok(predictions)
}

/// Join predictions to gold by tweet id and compute the evaluation report.
pub fn cmd_evaluate(
    pred_path: &Path,
    gold_path: &Path,
    task: &TaskSpec,
    out_path: Option<&Path>,
) -> Result<EvalReport> {
    let gold_ds = stage(
        "ingest",
        (|| -> Result<Dataset> {
            let ds = parse_dataset(gold_path, task)?;
            check_dimension(&ds, task)?;
            ds.gold_required()?;
            Ok(ds)
        })(),
    )?;
    let rows = stage("ingest", Ok(read_predictions(pred_path, task)?))?;

    let report = stage(
        "evaluate",
        (|| -> Result<EvalReport> {
            let by_id: BTreeMap<&str, &Gold> =
                rows.iter().map(|r| (r.id.as_str(), &r.value)).collect();
            let missing: Vec<&str> = gold_ds
                .tweets
                .iter()
                .filter(|t| !by_id.contains_key(t.id.as_str()))
                .map(|t| t.id.as_str())
                .collect();
            if !missing.is_empty() {
                bail!("predictions missing for ids: {}", missing.join(", "));
            }
            let unmatched: Vec<&str> = rows
                .iter()
                .filter(|r| !gold_ds.tweets.iter().any(|t| t.id == r.id))
                .map(|r| r.id.as_str())
                .collect();
            if !unmatched.is_empty() {
                bail!("predictions for unknown ids: {}", unmatched.join(", "));
            }

            let (pred, gold) = match task.kind {
                TaskKind::Regression { .. } => {
                    let mut p = Vec::new();
                    let mut g = Vec::new();
                    for t in &gold_ds.tweets {
                        let Gold::Intensity(pv) = by_id[t.id.as_str()] else {
                            bail!("prediction for '{}' is not real-valued", t.id);
                        };
                        let Some(Gold::Intensity(gv)) = t.gold else {
                            bail!("gold for '{}' is not real-valued", t.id);
                        };
                        p.push(*pv);
                        g.push(gv);
                    }
                    (Predictions::Reals(p), Predictions::Reals(g))
                }
                TaskKind::Ordinal { .. } => {
                    let mut p = Vec::new();
                    let mut g = Vec::new();
                    for t in &gold_ds.tweets {
                        let Gold::Class(pc) = by_id[t.id.as_str()] else {
                            bail!("prediction for '{}' is not a class label", t.id);
                        };
                        task.internal_class(*pc)?;
                        let Some(Gold::Class(gc)) = t.gold else {
                            bail!("gold for '{}' is not a class label", t.id);
                        };
                        p.push(*pc);
                        g.push(gc);
                    }
                    (Predictions::Classes(p), Predictions::Classes(g))
                }
            };
            Ok(evaluate(task, &pred, &gold)?)
        })(),
    )?;

    if let Some(path) = out_path {
        stage(
            "persist",
            std::fs::write(path, report.to_text())
                .with_context(|| format!("cannot write '{}'", path.display())),
        )?;
    }
    Ok(report)
}
