//! Featurizers: the native lexicon feature extractor plus file-backed
//! embedding tables standing in for pre-trained neural encoders.
//!
//! Every featurizer has a stable id and a declared dimension; `featurize_dataset`
//! turns a list of processed tweets into a [`FeatureMatrix`] whose row order
//! matches the input order.

use std::collections::{BTreeSet, HashMap};
use std::io::{BufRead, BufReader};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{io_err, Error, Result};
use crate::matrix::Matrix;
use crate::preprocess::ProcessedTweet;

/// Lexicon flavor: term scores or term-to-category membership.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LexiconKind {
    Scored,
    Categorical,
}

impl LexiconKind {
    pub fn parse(s: &str) -> Result<LexiconKind> {
        match s.to_ascii_lowercase().as_str() {
            "scored" => Ok(LexiconKind::Scored),
            "categorical" => Ok(LexiconKind::Categorical),
            other => Err(Error::Invalid(format!("unknown lexicon kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
enum LexiconEntries {
    Scored(HashMap<String, f64>),
    Categorical {
        /// Category order fixed by first appearance in the file.
        categories: Vec<String>,
        members: HashMap<String, BTreeSet<usize>>,
    },
}

/// An affect lexicon with lowercase terms.
#[derive(Debug, Clone)]
pub struct Lexicon {
    pub name: String,
    entries: LexiconEntries,
}

impl Lexicon {
    pub fn kind(&self) -> LexiconKind {
        match self.entries {
            LexiconEntries::Scored(_) => LexiconKind::Scored,
            LexiconEntries::Categorical { .. } => LexiconKind::Categorical,
        }
    }

    pub fn len(&self) -> usize {
        match &self.entries {
            LexiconEntries::Scored(m) => m.len(),
            LexiconEntries::Categorical { members, .. } => members.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Feature width this lexicon contributes: 4 aggregates for scored
    /// lexicons (sum, count, min, max), one count per category otherwise.
    pub fn width(&self) -> usize {
        match &self.entries {
            LexiconEntries::Scored(_) => 4,
            LexiconEntries::Categorical { categories, .. } => categories.len(),
        }
    }

    pub fn categories(&self) -> &[String] {
        match &self.entries {
            LexiconEntries::Scored(_) => &[],
            LexiconEntries::Categorical { categories, .. } => categories,
        }
    }
}

/// Load a lexicon file.
///
/// Scored: `term\tscore`. Categorical: `term\tcategory\t{0|1}` where rows
/// flagged 0 are ignored. Terms are lowercased on load.
pub fn load_lexicon(path: &Path, kind: LexiconKind, name: &str) -> Result<Lexicon> {
    let file = std::fs::File::open(path).map_err(|e| io_err(path, e))?;
    let reader = BufReader::new(file);
    let parse_err =
        |line: usize, msg: String| Error::Parse { path: path.display().to_string(), line, msg };

    let mut scored: HashMap<String, f64> = HashMap::new();
    let mut categories: Vec<String> = Vec::new();
    let mut category_index: HashMap<String, usize> = HashMap::new();
    let mut members: HashMap<String, BTreeSet<usize>> = HashMap::new();

    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        if line.is_empty() {
            continue;
        }
        let line_no = idx + 1;
        let cols: Vec<&str> = line.split('\t').collect();
        match kind {
            LexiconKind::Scored => {
                if cols.len() != 2 {
                    return Err(parse_err(
                        line_no,
                        format!("expected 2 columns (term, score), found {}", cols.len()),
                    ));
                }
                let score: f64 = cols[1]
                    .trim()
                    .parse()
                    .map_err(|_| parse_err(line_no, format!("non-numeric score '{}'", cols[1])))?;
                if !score.is_finite() {
                    return Err(parse_err(line_no, format!("non-finite score '{}'", cols[1])));
                }
                scored.insert(cols[0].to_lowercase(), score);
            }
            LexiconKind::Categorical => {
                if cols.len() != 3 {
                    return Err(parse_err(
                        line_no,
                        format!("expected 3 columns (term, category, flag), found {}", cols.len()),
                    ));
                }
                let flag = cols[2].trim();
                if flag != "0" && flag != "1" {
                    return Err(parse_err(line_no, format!("flag must be 0 or 1, found '{flag}'")));
                }
                let cat = cols[1].trim().to_lowercase();
                let cat_idx = *category_index.entry(cat.clone()).or_insert_with(|| {
                    categories.push(cat);
                    categories.len() - 1
                });
                if flag == "1" {
                    members.entry(cols[0].to_lowercase()).or_default().insert(cat_idx);
                }
            }
        }
    }

    let entries = match kind {
        LexiconKind::Scored => LexiconEntries::Scored(scored),
        LexiconKind::Categorical => LexiconEntries::Categorical { categories, members },
    };
    Ok(Lexicon { name: name.to_string(), entries })
}

/// Candidate lookup forms for a token: as-is, and with a leading `#` stripped
/// so hashtags can hit plain-word lexicons.
fn lookup_forms(token: &str) -> [Option<&str>; 2] {
    let stripped = token.strip_prefix('#').filter(|s| !s.is_empty());
    [Some(token), stripped]
}

/// Feature vector of one tweet over an ordered lexicon list.
///
/// Each scored lexicon contributes (sum, count, min, max) over matching
/// tokens, with min/max falling back to 0 when nothing matches; each
/// categorical lexicon contributes a per-category match count.
pub fn lexicon_features(tweet: &ProcessedTweet, lexicons: &[Lexicon]) -> Vec<f64> {
    let mut out = Vec::with_capacity(lexicons.iter().map(Lexicon::width).sum());
    for lex in lexicons {
        match &lex.entries {
            LexiconEntries::Scored(map) => {
                let mut sum = 0.0;
                let mut count = 0usize;
                let mut min = f64::INFINITY;
                let mut max = f64::NEG_INFINITY;
                for token in &tweet.tokens {
                    for form in lookup_forms(token).into_iter().flatten() {
                        if let Some(&score) = map.get(form) {
                            sum += score;
                            count += 1;
                            min = min.min(score);
                            max = max.max(score);
                        }
                    }
                }
                out.push(sum);
                out.push(count as f64);
                out.push(if count > 0 { min } else { 0.0 });
                out.push(if count > 0 { max } else { 0.0 });
            }
            LexiconEntries::Categorical { categories, members } => {
                let mut counts = vec![0.0; categories.len()];
                for token in &tweet.tokens {
                    for form in lookup_forms(token).into_iter().flatten() {
                        if let Some(cats) = members.get(form) {
                            for &c in cats {
                                counts[c] += 1.0;
                            }
                        }
                    }
                }
                out.extend(counts);
            }
        }
    }
    out
}

/// Precomputed per-tweet embedding vectors keyed by tweet id.
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    pub featurizer_id: String,
    pub dimension: usize,
    rows: HashMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&[f64]> {
        self.rows.get(id).map(Vec::as_slice)
    }
}

/// Load an embedding table.
///
/// Format: header line `<featurizer_id> <dimension>`, then one line per tweet:
/// `<tweet_id>\t<v1> <v2> ... <vd>` with decimal or scientific notation.
pub fn load_embedding_table(path: &Path, expected_dim: usize) -> Result<EmbeddingTable> {
    let file = std::fs::File::open(path).map_err(|e| io_err(path, e))?;
    let reader = BufReader::new(file);
    let parse_err =
        |line: usize, msg: String| Error::Parse { path: path.display().to_string(), line, msg };

    let mut lines = reader.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "missing header line".into()))?;
    let header = header.map_err(|e| io_err(path, e))?;
    let mut parts = header.split_whitespace();
    let featurizer_id = parts
        .next()
        .ok_or_else(|| parse_err(1, "header must be '<featurizer_id> <dimension>'".into()))?
        .to_string();
    let dimension: usize = parts
        .next()
        .and_then(|d| d.parse().ok())
        .ok_or_else(|| parse_err(1, "header must declare a positive integer dimension".into()))?;
    if parts.next().is_some() {
        return Err(parse_err(1, "header has trailing fields".into()));
    }
    if dimension == 0 {
        return Err(parse_err(1, "dimension must be positive".into()));
    }
    if dimension != expected_dim {
        return Err(Error::DimensionMismatch { expected: expected_dim, got: dimension });
    }

    let mut rows: HashMap<String, Vec<f64>> = HashMap::new();
    for (idx, line) in lines {
        let line = line.map_err(|e| io_err(path, e))?;
        if line.is_empty() {
            continue;
        }
        let line_no = idx + 1;
        let (id, values) = line
            .split_once('\t')
            .ok_or_else(|| parse_err(line_no, "expected '<tweet_id>\\t<values>'".into()))?;
        let mut vector = Vec::with_capacity(dimension);
        for v in values.split_whitespace() {
            let v: f64 = v
                .parse()
                .map_err(|_| parse_err(line_no, format!("bad value '{v}' for tweet '{id}'")))?;
            if !v.is_finite() {
                return Err(parse_err(line_no, format!("non-finite value for tweet '{id}'")));
            }
            vector.push(v);
        }
        if vector.len() != dimension {
            return Err(parse_err(
                line_no,
                format!("tweet '{id}' has {} values, expected {dimension}", vector.len()),
            ));
        }
        if rows.insert(id.to_string(), vector).is_some() {
            return Err(parse_err(line_no, format!("duplicate tweet id '{id}'")));
        }
    }
    Ok(EmbeddingTable { featurizer_id, dimension, rows })
}

/// A component mapping processed tweets to fixed-width real vectors.
#[derive(Debug, Clone)]
pub enum Featurizer {
    /// Native lexicon featurizer over an ordered lexicon list.
    Lexicon { id: String, lexicons: Vec<Lexicon> },
    /// File-backed lookup of precomputed embeddings.
    Embedding(EmbeddingTable),
}

impl Featurizer {
    pub fn id(&self) -> &str {
        match self {
            Featurizer::Lexicon { id, .. } => id,
            Featurizer::Embedding(table) => &table.featurizer_id,
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            Featurizer::Lexicon { lexicons, .. } => lexicons.iter().map(Lexicon::width).sum(),
            Featurizer::Embedding(table) => table.dimension,
        }
    }
}

/// One featurizer's dense feature block for a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub featurizer_id: String,
    pub ids: Vec<String>,
    pub values: Matrix,
}

impl FeatureMatrix {
    pub fn dimension(&self) -> usize {
        self.values.n_cols()
    }

    pub fn n_rows(&self) -> usize {
        self.values.n_rows()
    }
}

/// Compute the feature matrix of a dataset under one featurizer. Row `i`
/// holds the feature vector of `tweets[i]`.
pub fn featurize_dataset(
    tweets: &[ProcessedTweet],
    featurizer: &Featurizer,
) -> Result<FeatureMatrix> {
    let ids: Vec<String> = tweets.iter().map(|t| t.id.clone()).collect();
    let d = featurizer.dimension();
    let rows: Vec<Vec<f64>> = match featurizer {
        Featurizer::Lexicon { lexicons, .. } => {
            tweets.par_iter().map(|t| lexicon_features(t, lexicons)).collect()
        }
        Featurizer::Embedding(table) => {
            let missing: Vec<String> = tweets
                .iter()
                .filter(|t| table.get(&t.id).is_none())
                .map(|t| t.id.clone())
                .collect();
            if !missing.is_empty() {
                return Err(Error::MissingTweetIds {
                    featurizer: table.featurizer_id.clone(),
                    ids: missing,
                });
            }
            tweets.iter().map(|t| table.get(&t.id).unwrap().to_vec()).collect()
        }
    };
    let mut values = Matrix::from_rows(&rows)?;
    if tweets.is_empty() {
        values = Matrix::zeros(0, d);
    }
    debug_assert_eq!(values.n_cols(), d);
    Ok(FeatureMatrix { featurizer_id: featurizer.id().to_string(), ids, values })
}
