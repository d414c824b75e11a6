//! Labeled polylingual topic model: one topic per class, a per-document
//! mixture restricted to the document's labels and shared by both languages,
//! fitted by collapsed Gibbs sampling.

mod state;
mod train;

pub use state::ModelState;
pub use train::{train, train_with_observer, TrainedModel, MODEL_FORMAT, MODEL_VERSION};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid hyperparameters: {0}")]
    InvalidHyperparameters(String),
    #[error("document {doc:?} has no labels")]
    EmptyLabels { doc: String },
    #[error("corpus has no topics")]
    NoTopics,
    #[error("invalid assignment: {0}")]
    InvalidAssignment(String),
    #[error("log-likelihood became non-finite after sweep {sweep}")]
    NonFiniteLikelihood { sweep: usize },
    #[error("model file: {0}")]
    Format(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    /// Symmetric document-topic concentration over a document's labels.
    pub alpha: f64,
    pub beta_words: f64,
    pub beta_descriptors: f64,
    pub iterations: usize,
    pub burn_in: usize,
    pub sample_lag: usize,
    pub seed: u64,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Hyperparameters {
            alpha: 0.1,
            beta_words: 0.01,
            beta_descriptors: 0.01,
            iterations: 1000,
            burn_in: 500,
            sample_lag: 10,
            seed: 42,
        }
    }
}

impl Hyperparameters {
    pub fn validate(&self) -> Result<(), ModelError> {
        let fail = |m: String| Err(ModelError::InvalidHyperparameters(m));
        for (name, v) in [
            ("alpha", self.alpha),
            ("beta_words", self.beta_words),
            ("beta_descriptors", self.beta_descriptors),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return fail(format!("{name} must be finite and positive, got {v}"));
            }
        }
        if self.burn_in == 0 || self.burn_in >= self.iterations {
            return fail(format!(
                "need 0 < burn_in < iterations, got burn_in={} iterations={}",
                self.burn_in, self.iterations
            ));
        }
        if self.sample_lag == 0 {
            return fail("sample_lag must be at least 1".into());
        }
        Ok(())
    }

    pub fn beta(&self, lang: crate::corpus::Language) -> f64 {
        match lang {
            crate::corpus::Language::Words => self.beta_words,
            crate::corpus::Language::Descriptors => self.beta_descriptors,
        }
    }
}
