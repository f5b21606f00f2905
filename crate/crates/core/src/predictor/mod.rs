//! Pointwise density regression on local-environment descriptors.

mod dataset;
mod descriptor;
mod ridge;

pub use dataset::{sample_dataset, sample_manifest_hash, QuerySample, TrainingItem};
pub use descriptor::{featurize, DescriptorSpec};
pub use ridge::{evaluate_mae, fit, predict_grid, PredictorModel};

use crate::crystal::SpeciesId;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PredictError {
    #[error("invalid descriptor spec: {0}")]
    InvalidSpec(String),
    #[error("model does not cover species {0}")]
    Coverage(SpeciesId),
    #[error("grid mismatch: {0:?} vs {1:?}")]
    Shape([usize; 3], [usize; 3]),
    #[error("need at least {need} samples, have {have}")]
    TooFewSamples { need: usize, have: usize },
    #[error("normal matrix is singular")]
    SingularSystem,
    #[error("model weights are invalid: {0}")]
    InvalidModel(String),
    #[error("model json: {0}")]
    Json(#[from] serde_json::Error),
}
