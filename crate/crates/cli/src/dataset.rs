//! Dataset and prediction file I/O.
//!
//! Datasets are 4-column TSV (id, text, dimension, gold) with an optional
//! header detected by a literal `ID` in the first column. Regression gold is
//! a real in the task range; ordinal gold uses the `N: description` label
//! grammar with only the integer consumed; `NONE` marks unlabeled rows.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use affect_core::error::{Error, Result};
use affect_core::task::{Gold, Predictions, TaskKind, TaskSpec};
use affect_core::RawTweet;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub task: TaskSpec,
    pub tweets: Vec<RawTweet>,
}

impl Dataset {
    /// Gold labels for every tweet; errors list the ids missing one.
    pub fn gold_required(&self) -> Result<Vec<Gold>> {
        let missing: Vec<String> =
            self.tweets.iter().filter(|t| t.gold.is_none()).map(|t| t.id.clone()).collect();
        if !missing.is_empty() {
            return Err(Error::Invalid(format!(
                "tweets without gold labels: {}",
                missing.join(", ")
            )));
        }
        Ok(self.tweets.iter().map(|t| t.gold.unwrap()).collect())
    }
}

fn parse_gold(raw: &str, task: &TaskSpec, path: &str, line: usize) -> Result<Option<Gold>> {
    let raw = raw.trim();
    if raw == "NONE" {
        return Ok(None);
    }
    let parse_err = |msg: String| Error::Parse { path: path.to_string(), line, msg };
    match task.kind {
        TaskKind::Regression { lo, hi } => {
            let v: f64 =
                raw.parse().map_err(|_| parse_err(format!("unparsable intensity '{raw}'")))?;
            if !(v >= lo && v <= hi) {
                return Err(parse_err(format!("intensity {v} outside [{lo}, {hi}]")));
            }
            Ok(Some(Gold::Intensity(v)))
        }
        TaskKind::Ordinal { .. } => {
            let head = raw.split(':').next().unwrap_or(raw).trim();
            let label: i64 =
                head.parse().map_err(|_| parse_err(format!("unparsable class label '{raw}'")))?;
            task.internal_class(label).map_err(|e| parse_err(e.to_string()))?;
            Ok(Some(Gold::Class(label)))
        }
    }
}

/// Parse a dataset file under the given task.
pub fn parse_dataset(path: &Path, task: &TaskSpec) -> Result<Dataset> {
    let body = std::fs::read_to_string(path)
        .map_err(|e| Error::Io { path: path.display().to_string(), source: e })?;
    let path_str = path.display().to_string();
    let mut tweets = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    for (idx, line) in body.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let line_no = idx + 1;
        let cols: Vec<&str> = line.split('\t').collect();
        let parse_err = |msg: String| Error::Parse { path: path_str.clone(), line: line_no, msg };
        if cols.len() != 4 {
            return Err(parse_err(format!(
                "expected 4 tab-separated columns, found {}",
                cols.len()
            )));
        }
        if idx == 0 && cols[0] == "ID" {
            continue; // header row
        }
        let (id, text, dimension) = (cols[0].trim(), cols[1], cols[2].trim());
        if id.is_empty() {
            return Err(parse_err("empty tweet id".into()));
        }
        if text.is_empty() {
            return Err(parse_err(format!("tweet '{id}' has empty text")));
        }
        if !seen.insert(id.to_string()) {
            return Err(parse_err(format!("duplicate tweet id '{id}'")));
        }
        let gold = parse_gold(cols[3], task, &path_str, line_no)?;
        tweets.push(RawTweet {
            id: id.to_string(),
            text: text.to_string(),
            dimension: dimension.to_string(),
            gold,
        });
    }
    Ok(Dataset { task: *task, tweets })
}

/// Write a dataset in the same TSV shape `parse_dataset` reads.
pub fn serialize_dataset(dataset: &Dataset, path: &Path) -> Result<()> {
    let mut out = String::new();
    for t in &dataset.tweets {
        let gold = match t.gold {
            None => "NONE".to_string(),
            Some(Gold::Intensity(v)) => format!("{v}"),
            Some(Gold::Class(c)) => format!("{c}: class {c}"),
        };
        let _ = writeln!(out, "{}\t{}\t{}\t{}", t.id, t.text, t.dimension, gold);
    }
    std::fs::write(path, out).map_err(|e| Error::Io { path: path.display().to_string(), source: e })
}

/// Write predictions as `id\tdimension\tvalue`, one row per input tweet in
/// input order; ordinal labels are rendered as the bare integer.
pub fn write_predictions(
    path: &Path,
    tweets: &[RawTweet],
    predictions: &Predictions,
) -> Result<()> {
    if tweets.len() != predictions.len() {
        return Err(Error::Invalid(format!(
            "{} tweets but {} predictions",
            tweets.len(),
            predictions.len()
        )));
    }
    let mut out = String::new();
    match predictions {
        Predictions::Reals(values) => {
            for (t, v) in tweets.iter().zip(values) {
                let _ = writeln!(out, "{}\t{}\t{}", t.id, t.dimension, v);
            }
        }
        Predictions::Classes(labels) => {
            for (t, c) in tweets.iter().zip(labels) {
                let _ = writeln!(out, "{}\t{}\t{}", t.id, t.dimension, c);
            }
        }
    }
    std::fs::write(path, out).map_err(|e| Error::Io { path: path.display().to_string(), source: e })
}

/// One parsed prediction row.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionRow {
    pub id: String,
    pub dimension: String,
    pub value: Gold,
}

/// Read a prediction file under the given task.
pub fn read_predictions(path: &Path, task: &TaskSpec) -> Result<Vec<PredictionRow>> {
    let body = std::fs::read_to_string(path)
        .map_err(|e| Error::Io { path: path.display().to_string(), source: e })?;
    let path_str = path.display().to_string();
    let mut rows = Vec::new();
    for (idx, line) in body.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let line_no = idx + 1;
        let cols: Vec<&str> = line.split('\t').collect();
        let parse_err = |msg: String| Error::Parse { path: path_str.clone(), line: line_no, msg };
        if cols.len() != 3 {
            return Err(parse_err(format!(
                "expected 3 tab-separated columns, found {}",
                cols.len()
            )));
        }
        let value = match task.kind {
            TaskKind::Regression { .. } => Gold::Intensity(
                cols[2]
                    .trim()
                    .parse()
                    .map_err(|_| parse_err(format!("unparsable prediction '{}'", cols[2])))?,
            ),
            TaskKind::Ordinal { .. } => Gold::Class(
                cols[2]
                    .trim()
                    .parse()
                    .map_err(|_| parse_err(format!("unparsable class '{}'", cols[2])))?,
            ),
        };
        rows.push(PredictionRow {
            id: cols[0].trim().to_string(),
            dimension: cols[1].trim().to_string(),
            value,
        });
    }
    Ok(rows)
}
