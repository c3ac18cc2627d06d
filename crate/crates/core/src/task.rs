//! Task definitions: what is being predicted and on what scale.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Affect dimension being estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dimension {
    Anger,
    Fear,
    Joy,
    Sadness,
    Valence,
}

impl Dimension {
    pub const EMOTIONS: [Dimension; 4] =
        [Dimension::Anger, Dimension::Fear, Dimension::Joy, Dimension::Sadness];

    pub fn name(&self) -> &'static str {
        match self {
            Dimension::Anger => "anger",
            Dimension::Fear => "fear",
            Dimension::Joy => "joy",
            Dimension::Sadness => "sadness",
            Dimension::Valence => "valence",
        }
    }

    pub fn parse(s: &str) -> Result<Dimension> {
        match s.to_ascii_lowercase().as_str() {
            "anger" => Ok(Dimension::Anger),
            "fear" => Ok(Dimension::Fear),
            "joy" => Ok(Dimension::Joy),
            "sadness" => Ok(Dimension::Sadness),
            "valence" => Ok(Dimension::Valence),
            other => Err(Error::Invalid(format!("unknown affect dimension '{other}'"))),
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Task kind: real-valued intensity or ordered classes.
///
/// Ordinal class sets are contiguous integer label ranges (`0..=3` for the
/// emotion scale, `-3..=3` for valence) with an internal 0-based mapping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TaskKind {
    Regression { lo: f64, hi: f64 },
    Ordinal { min_label: i64, max_label: i64 },
}

/// Full task description: kind plus affect dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    #[serde(flatten)]
    pub kind: TaskKind,
    pub dimension: Dimension,
}

impl TaskSpec {
    pub fn new(kind: TaskKind, dimension: Dimension) -> Result<TaskSpec> {
        match kind {
            TaskKind::Regression { lo, hi } => {
                if !(0.0 <= lo && lo < hi && hi <= 1.0) {
                    return Err(Error::Invalid(format!(
                        "regression range [{lo}, {hi}] must satisfy 0 <= lo < hi <= 1"
                    )));
                }
            }
            TaskKind::Ordinal { min_label, max_label } => {
                if min_label >= max_label {
                    return Err(Error::Invalid(format!(
                        "ordinal label range [{min_label}, {max_label}] needs at least 2 classes"
                    )));
                }
            }
        }
        Ok(TaskSpec { kind, dimension })
    }

    /// Emotion intensity regression on [0, 1].
    pub fn ei_reg(dimension: Dimension) -> TaskSpec {
        TaskSpec { kind: TaskKind::Regression { lo: 0.0, hi: 1.0 }, dimension }
    }

    /// Emotion intensity ordinal classification on classes 0..=3.
    pub fn ei_oc(dimension: Dimension) -> TaskSpec {
        TaskSpec { kind: TaskKind::Ordinal { min_label: 0, max_label: 3 }, dimension }
    }

    /// Valence regression on [0, 1].
    pub fn v_reg() -> TaskSpec {
        TaskSpec { kind: TaskKind::Regression { lo: 0.0, hi: 1.0 }, dimension: Dimension::Valence }
    }

    /// Valence ordinal classification on classes -3..=3.
    pub fn v_oc() -> TaskSpec {
        TaskSpec {
            kind: TaskKind::Ordinal { min_label: -3, max_label: 3 },
            dimension: Dimension::Valence,
        }
    }

    pub fn is_ordinal(&self) -> bool {
        matches!(self.kind, TaskKind::Ordinal { .. })
    }

    /// Number of ordinal classes; 0 for regression tasks.
    pub fn n_classes(&self) -> usize {
        match self.kind {
            TaskKind::Ordinal { min_label, max_label } => (max_label - min_label + 1) as usize,
            TaskKind::Regression { .. } => 0,
        }
    }

    /// Map an external ordinal label (e.g. -3..=3) to the internal 0-based class.
    pub fn internal_class(&self, label: i64) -> Result<usize> {
        match self.kind {
            TaskKind::Ordinal { min_label, max_label } => {
                if label < min_label || label > max_label {
                    Err(Error::Invalid(format!(
                        "class {label} outside label range [{min_label}, {max_label}]"
                    )))
                } else {
                    Ok((label - min_label) as usize)
                }
            }
            TaskKind::Regression { .. } => {
                Err(Error::Invalid("regression task has no classes".into()))
            }
        }
    }

    /// Map an internal 0-based class back to the external label.
    pub fn external_label(&self, class: usize) -> i64 {
        match self.kind {
            TaskKind::Ordinal { min_label, .. } => min_label + class as i64,
            TaskKind::Regression { .. } => class as i64,
        }
    }

    /// Internal class of the task's neutral label (no-emotion / neutral valence).
    ///
    /// Both scales place it at external label 0.
    pub fn neutral_class(&self) -> Option<usize> {
        match self.kind {
            TaskKind::Ordinal { .. } => self.internal_class(0).ok(),
            TaskKind::Regression { .. } => None,
        }
    }

    /// Short task name, e.g. `EI-reg/joy` or `V-oc`.
    pub fn label(&self) -> String {
        match (self.kind, self.dimension) {
            (TaskKind::Regression { .. }, Dimension::Valence) => "V-reg".into(),
            (TaskKind::Ordinal { .. }, Dimension::Valence) => "V-oc".into(),
            (TaskKind::Regression { .. }, d) => format!("EI-reg/{d}"),
            (TaskKind::Ordinal { .. }, d) => format!("EI-oc/{d}"),
        }
    }
}

/// A gold annotation attached to a tweet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Gold {
    /// Real-valued intensity for regression tasks.
    Intensity(f64),
    /// External ordinal class label.
    Class(i64),
}

/// Training targets in internal form.
#[derive(Debug, Clone, PartialEq)]
pub enum GoldVec {
    Reals(Vec<f64>),
    /// Internal 0-based classes plus the class count.
    Classes(Vec<usize>, usize),
}

impl GoldVec {
    pub fn len(&self) -> usize {
        match self {
            GoldVec::Reals(v) => v.len(),
            GoldVec::Classes(v, _) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Targets as reals (internal classes cast for ordinal tasks).
    pub fn as_reals(&self) -> Vec<f64> {
        match self {
            GoldVec::Reals(v) => v.clone(),
            GoldVec::Classes(v, _) => v.iter().map(|&c| c as f64).collect(),
        }
    }

    pub fn select(&self, indices: &[usize]) -> GoldVec {
        match self {
            GoldVec::Reals(v) => GoldVec::Reals(indices.iter().map(|&i| v[i]).collect()),
            GoldVec::Classes(v, k) => GoldVec::Classes(indices.iter().map(|&i| v[i]).collect(), *k),
        }
    }
}

/// Final pipeline output for a dataset.
#[derive(Debug, Clone, PartialEq)]
pub enum Predictions {
    /// Regression outputs, clamped to the task range.
    Reals(Vec<f64>),
    /// External ordinal labels.
    Classes(Vec<i64>),
}

impl Predictions {
    pub fn len(&self) -> usize {
        match self {
            Predictions::Reals(v) => v.len(),
            Predictions::Classes(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
