//! Tweet affect estimation toolkit.
//!
//! The pipeline mirrors a stacked-generalization architecture for affect
//! intensity tasks: tweets are normalized ([`preprocess`]), mapped to
//! fixed-width vectors by lexicon and precomputed-embedding featurizers
//! ([`featurize`]), a model zoo is tuned per featurizer with 7-fold
//! cross-validation keeping the top two models each ([`ensemble`]), and a
//! linear meta-model stacks the retained members. [`metrics`] implements the
//! evaluation suite: Pearson correlation (plain, macro-averaged, and
//! high-intensity subset), quadratic weighted kappa, and the some-emotion
//! subset variants.

pub mod ensemble;
pub mod error;
pub mod featurize;
pub mod matrix;
pub mod metrics;
pub mod models;
pub mod preprocess;
pub mod seed;
pub mod task;

pub use error::{Error, Result};
pub use featurize::{FeatureMatrix, Featurizer};
pub use matrix::Matrix;
pub use preprocess::{EmojiMap, ProcessedTweet, RawTweet};
pub use task::{Dimension, Gold, GoldVec, Predictions, TaskKind, TaskSpec};
