//! Run manifests: one TOML file declaring the task, data paths, featurizers,
//! grid overrides, and the run seed. Relative paths resolve against the
//! manifest's directory.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use affect_core::featurize::LexiconKind;
use affect_core::models::HyperParams;
use affect_core::task::{Dimension, TaskKind, TaskSpec};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub task: TaskSection,
    pub data: DataSection,
    #[serde(default)]
    pub preprocess: PreprocessSection,
    #[serde(default)]
    pub featurizers: FeaturizerSection,
    pub run: RunSection,
    /// Hyper-parameter grid override; the task's default grid when empty.
    #[serde(default)]
    pub grid: Vec<HyperParams>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TaskSection {
    /// `regression` or `ordinal`.
    pub kind: String,
    /// `anger`, `fear`, `joy`, `sadness`, or `valence`.
    pub dimension: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DataSection {
    pub train: PathBuf,
    #[serde(default)]
    pub dev: Option<PathBuf>,
    /// Merge the dev set into training.
    #[serde(default)]
    pub merge_dev: bool,
    #[serde(default)]
    pub test: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct PreprocessSection {
    #[serde(default)]
    pub emoji_map: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeaturizerSection {
    /// Id of the native lexicon featurizer (one featurizer per run,
    /// aggregating every declared lexicon in order).
    #[serde(default = "default_lexicon_id")]
    pub lexicon_id: String,
    #[serde(default)]
    pub lexicons: Vec<LexiconDecl>,
    #[serde(default)]
    pub embeddings: Vec<EmbeddingDecl>,
}

impl Default for FeaturizerSection {
    fn default() -> Self {
        FeaturizerSection {
            lexicon_id: default_lexicon_id(),
            lexicons: Vec::new(),
            embeddings: Vec::new(),
        }
    }
}

fn default_lexicon_id() -> String {
    "lexicon".to_string()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LexiconDecl {
    pub name: String,
    /// `scored` or `categorical`.
    pub kind: String,
    pub path: PathBuf,
}

impl LexiconDecl {
    pub fn kind(&self) -> Result<LexiconKind> {
        Ok(LexiconKind::parse(&self.kind)?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmbeddingDecl {
    pub path: PathBuf,
    /// Expected dimension; validated against the file header when set.
    #[serde(default)]
    pub dim: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSection {
    pub seed: u64,
    #[serde(default = "default_folds")]
    pub folds: usize,
    pub out_dir: PathBuf,
}

fn default_folds() -> usize {
    affect_core::ensemble::DEFAULT_FOLDS
}

impl RunManifest {
    pub fn task_spec(&self) -> Result<TaskSpec> {
        let dimension = Dimension::parse(&self.task.dimension)?;
        let kind = match self.task.kind.to_ascii_lowercase().as_str() {
            "regression" => TaskKind::Regression { lo: 0.0, hi: 1.0 },
            "ordinal" => match dimension {
                Dimension::Valence => TaskKind::Ordinal { min_label: -3, max_label: 3 },
                _ => TaskKind::Ordinal { min_label: 0, max_label: 3 },
            },
            other => bail!("unknown task kind '{other}' (expected regression or ordinal)"),
        };
        Ok(TaskSpec::new(kind, dimension)?)
    }

    /// Resolve a manifest-relative path.
    pub fn resolve(&self, base: &Path, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            base.join(path)
        }
    }

    /// Check that every referenced input exists.
    pub fn validate(&self, base: &Path) -> Result<()> {
        let mut paths: Vec<(&str, PathBuf)> =
            vec![("data.train", self.resolve(base, &self.data.train))];
        if let Some(dev) = &self.data.dev {
            paths.push(("data.dev", self.resolve(base, dev)));
        }
        if let Some(test) = &self.data.test {
            paths.push(("data.test", self.resolve(base, test)));
        }
        if let Some(map) = &self.preprocess.emoji_map {
            paths.push(("preprocess.emoji_map", self.resolve(base, map)));
        }
        for lex in &self.featurizers.lexicons {
            lex.kind()?;
            paths.push(("featurizers.lexicons", self.resolve(base, &lex.path)));
        }
        for emb in &self.featurizers.embeddings {
            paths.push(("featurizers.embeddings", self.resolve(base, &emb.path)));
        }
        for (field, p) in paths {
            if !p.exists() {
                bail!("{field}: no such file '{}'", p.display());
            }
        }
        if self.featurizers.lexicons.is_empty() && self.featurizers.embeddings.is_empty() {
            bail!("at least one featurizer (lexicons or embeddings) must be declared");
        }
        for params in &self.grid {
            params.validate()?;
        }
        Ok(())
    }
}

/// Load a manifest and remember its directory for path resolution.
pub fn load_manifest(path: &Path) -> Result<(RunManifest, PathBuf)> {
    let body = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read manifest '{}'", path.display()))?;
    let manifest: RunManifest = toml::from_str(&body)
        .with_context(|| format!("cannot parse manifest '{}'", path.display()))?;
    let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    Ok((manifest, base))
}
