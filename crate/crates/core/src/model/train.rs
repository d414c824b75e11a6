use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{Hyperparameters, ModelError, ModelState};
use crate::corpus::{Corpus, Language, Vocabulary};
use crate::rng::RNG_ALGORITHM;

pub const MODEL_FORMAT: &str = "koslinker-model";
pub const MODEL_VERSION: u32 = 1;

/// Averaged topic-term distributions of a finished chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub num_topics: usize,
    pub hyperparameters: Hyperparameters,
    pub rng_algorithm: String,
    pub word_vocab: Vocabulary,
    pub descriptor_vocab: Vocabulary,
    pub descriptor_labels: Vec<String>,
    /// `[topic][word]`, rows sum to one.
    pub phi_words: Vec<Vec<f64>>,
    /// `[topic][descriptor]`, rows sum to one.
    pub phi_descriptors: Vec<Vec<f64>>,
    /// Tokens per topic at the final state.
    pub word_support: Vec<u64>,
    pub descriptor_support: Vec<u64>,
    /// Number of states averaged into the phi rows.
    pub samples: usize,
    /// Joint log-likelihood after each sweep.
    pub log_likelihood: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile<M> {
    format: String,
    version: u32,
    model: M,
}

impl TrainedModel {
    pub fn phi(&self, lang: Language) -> &[Vec<f64>] {
        match lang {
            Language::Words => &self.phi_words,
            Language::Descriptors => &self.phi_descriptors,
        }
    }

    pub fn write_to<W: Write>(&self, out: W) -> Result<(), ModelError> {
        let file = ModelFile {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            model: self,
        };
        serde_json::to_writer(out, &file).map_err(|e| ModelError::Format(e.to_string()))
    }

    pub fn read_from<R: Read>(source: R) -> Result<Self, ModelError> {
        let file: ModelFile<TrainedModel> =
            serde_json::from_reader(std::io::BufReader::new(source))
                .map_err(|e| ModelError::Format(e.to_string()))?;
        if file.format != MODEL_FORMAT || file.version != MODEL_VERSION {
            return Err(ModelError::Format(format!(
                "expected {MODEL_FORMAT} v{MODEL_VERSION}, found {} v{}",
                file.format, file.version
            )));
        }
        let m = file.model;
        let shape_ok = |rows: &[Vec<f64>], v: usize| {
            rows.len() == m.num_topics && rows.iter().all(|r| r.len() == v)
        };
        if !shape_ok(&m.phi_words, m.word_vocab.len())
            || !shape_ok(&m.phi_descriptors, m.descriptor_vocab.len())
            || m.descriptor_labels.len() != m.descriptor_vocab.len()
            || m.descriptor_support.len() != m.num_topics
            || m.word_support.len() != m.num_topics
        {
            return Err(ModelError::Format("inconsistent matrix shapes".into()));
        }
        Ok(m)
    }
}

/// Runs `hyper.iterations` sweeps, averaging smoothed phi rows every
/// `sample_lag` sweeps after `burn_in`.
pub fn train(corpus: &Corpus, hyper: &Hyperparameters) -> Result<TrainedModel, ModelError> {
    train_with_observer(corpus, hyper, |_, _| {})
}

/// Like [`train`], calling `observe(sweep, log_likelihood)` after each sweep
/// (1-based).
pub fn train_with_observer<F>(
    corpus: &Corpus,
    hyper: &Hyperparameters,
    mut observe: F,
) -> Result<TrainedModel, ModelError>
where
    F: FnMut(usize, f64),
{
    hyper.validate()?;
    let mut state = ModelState::initialize(corpus, hyper)?;
    let mut trace = Vec::with_capacity(hyper.iterations);
    for sweep in 1..=hyper.iterations {
        state.sweep();
        let ll = state.log_likelihood();
        if !ll.is_finite() {
            return Err(ModelError::NonFiniteLikelihood { sweep });
        }
        trace.push(ll);
        observe(sweep, ll);
        if sweep > hyper.burn_in && (sweep - hyper.burn_in).is_multiple_of(hyper.sample_lag) {
            state.accumulate_phi();
        }
    }
    if state.accumulated_samples() == 0 {
        // lag longer than the post-burn-in window
        state.accumulate_phi();
    }

    let support = |lang| {
        (0..corpus.num_topics)
            .map(|k| state.topic_total(lang, k))
            .collect()
    };
    Ok(TrainedModel {
        num_topics: corpus.num_topics,
        hyperparameters: hyper.clone(),
        rng_algorithm: RNG_ALGORITHM.to_string(),
        word_vocab: corpus.word_vocab.clone(),
        descriptor_vocab: corpus.descriptor_vocab.clone(),
        descriptor_labels: corpus.descriptor_labels.clone(),
        phi_words: state.averaged_phi(Language::Words).unwrap(),
        phi_descriptors: state.averaged_phi(Language::Descriptors).unwrap(),
        word_support: support(Language::Words),
        descriptor_support: support(Language::Descriptors),
        samples: state.accumulated_samples(),
        log_likelihood: trace,
    })
}
