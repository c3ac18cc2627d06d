//! Library surface of the command-line driver, exposed so integration tests
//! can exercise the commands directly.

pub mod commands;
pub mod dataset;
pub mod manifest;

pub use commands::{cmd_evaluate, cmd_predict, cmd_train, TrainOutcome};
pub use dataset::{parse_dataset, read_predictions, serialize_dataset, write_predictions, Dataset};
pub use manifest::{load_manifest, RunManifest};
