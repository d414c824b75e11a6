//! Corpora drawn from the labeled two-language generative process with known
//! topic-term distributions, for recovery tests.

use std::io::Write;
use std::path::Path;

use rand::seq::index::sample;
use rand_distr::{Distribution, Gamma};

use super::{Corpus, CorpusError, Document, IngestReport, Language, TokenCounts, Vocabulary};
use crate::rng::{self, SeededRng};

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub num_topics: usize,
    pub word_vocab_size: usize,
    pub descriptor_vocab_size: usize,
    pub num_docs: usize,
    pub words_per_doc: usize,
    pub descriptors_per_doc: usize,
    pub labels_per_doc: usize,
    /// Symmetric Dirichlet concentration of the planted topic-term rows.
    pub concentration: f64,
    /// Symmetric Dirichlet concentration of each document's mixture over its
    /// labels.
    pub mixture_concentration: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            num_topics: 10,
            word_vocab_size: 500,
            descriptor_vocab_size: 200,
            num_docs: 2000,
            words_per_doc: 40,
            descriptors_per_doc: 10,
            labels_per_doc: 2,
            concentration: 0.05,
            mixture_concentration: 1.0,
            seed: 1,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<(), CorpusError> {
        let fail = |m: &str| Err(CorpusError::InvalidSpec(m.to_string()));
        if self.num_topics == 0
            || self.word_vocab_size == 0
            || self.descriptor_vocab_size == 0
            || self.num_docs == 0
            || self.labels_per_doc == 0
        {
            return fail("sizes must be positive");
        }
        if self.words_per_doc + self.descriptors_per_doc == 0 {
            return fail("documents need at least one token");
        }
        if self.labels_per_doc > self.num_topics {
            return fail("labels_per_doc exceeds num_topics");
        }
        let ok = |c: f64| c.is_finite() && c > 0.0;
        if !ok(self.concentration) || !ok(self.mixture_concentration) {
            return fail("concentrations must be finite and positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub corpus: Corpus,
    /// Planted topic-term rows, `[topic][term]`.
    pub planted_words: Vec<Vec<f64>>,
    pub planted_descriptors: Vec<Vec<f64>>,
}

impl SyntheticCorpus {
    pub fn planted(&self, lang: Language) -> &[Vec<f64>] {
        match lang {
            Language::Words => &self.planted_words,
            Language::Descriptors => &self.planted_descriptors,
        }
    }

    /// Indices of the `n` largest planted descriptor probabilities of a topic,
    /// ties by index.
    pub fn planted_top_descriptors(&self, topic: usize, n: usize) -> Vec<usize> {
        let row = &self.planted_descriptors[topic];
        let mut idx: Vec<usize> = (0..row.len()).collect();
        idx.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
        idx.truncate(n);
        idx
    }

    /// Writes the corpus back out as source files (`classification.csv`,
    /// `thesaurus.jsonl`, `documents.jsonl`) so it can go through ingest.
    /// Classes are flat: `c000`, `c001`, ... in topic order.
    pub fn write_sources(&self, dir: &Path) -> Result<(), CorpusError> {
        let corpus = &self.corpus;
        let mut cls =
            std::io::BufWriter::new(std::fs::File::create(dir.join("classification.csv"))?);
        writeln!(cls, "code,name,parent")?;
        for k in 0..corpus.num_topics {
            writeln!(cls, "{},Synthetic class {k},", class_code(k))?;
        }
        cls.flush()?;

        let mut th = std::io::BufWriter::new(std::fs::File::create(dir.join("thesaurus.jsonl"))?);
        for (id, label) in corpus
            .descriptor_vocab
            .terms()
            .iter()
            .zip(&corpus.descriptor_labels)
        {
            let row = serde_json::json!({ "id": id, "label": label, "alt": [] });
            writeln!(th, "{row}")?;
        }
        th.flush()?;

        let mut docs = std::io::BufWriter::new(std::fs::File::create(dir.join("documents.jsonl"))?);
        for d in &corpus.documents {
            let text: Vec<&str> = d
                .word_tokens
                .iter()
                .map(|&w| corpus.word_vocab.term(w).unwrap())
                .collect();
            let descriptors: Vec<&str> = d
                .descriptor_tokens
                .iter()
                .map(|&t| corpus.descriptor_labels[t as usize].as_str())
                .collect();
            let classes: Vec<String> = d.labels.iter().map(|&k| class_code(k as usize)).collect();
            let row = serde_json::json!({
                "id": d.id,
                "abstract": text.join(" "),
                "descriptors": descriptors,
                "classes": classes,
            });
            writeln!(docs, "{row}")?;
        }
        docs.flush()?;
        Ok(())
    }
}

pub fn class_code(topic: usize) -> String {
    format!("c{topic:03}")
}

/// Draws a corpus from the generative process: per topic one Dirichlet row per
/// language; per document a uniform label subset, a Dirichlet mixture over it,
/// then a topic and a term for every token.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<SyntheticCorpus, CorpusError> {
    spec.validate()?;
    let mut rng = rng::seeded(spec.seed);
    let planted_words: Vec<Vec<f64>> = (0..spec.num_topics)
        .map(|_| dirichlet(&mut rng, spec.concentration, spec.word_vocab_size))
        .collect();
    let planted_descriptors: Vec<Vec<f64>> = (0..spec.num_topics)
        .map(|_| dirichlet(&mut rng, spec.concentration, spec.descriptor_vocab_size))
        .collect();

    let mut documents = Vec::with_capacity(spec.num_docs);
    for i in 0..spec.num_docs {
        let mut labels: Vec<u32> = sample(&mut rng, spec.num_topics, spec.labels_per_doc)
            .into_iter()
            .map(|k| k as u32)
            .collect();
        labels.sort_unstable();
        let mixture = dirichlet(&mut rng, spec.mixture_concentration, labels.len());
        let draw = |n: usize, rows: &[Vec<f64>], rng: &mut SeededRng| -> Vec<u32> {
            (0..n)
                .map(|_| {
                    let k = labels[rng::categorical(rng, &mixture, 1.0)] as usize;
                    rng::categorical(rng, &rows[k], 1.0) as u32
                })
                .collect()
        };
        let word_tokens = draw(spec.words_per_doc, &planted_words, &mut rng);
        let descriptor_tokens = draw(spec.descriptors_per_doc, &planted_descriptors, &mut rng);
        documents.push(Document {
            id: format!("doc{i:06}"),
            word_tokens,
            descriptor_tokens,
            labels,
        });
    }

    let word_vocab: Vocabulary = (0..spec.word_vocab_size)
        .map(|v| format!("w{v:05}"))
        .collect();
    let descriptor_vocab: Vocabulary = (0..spec.descriptor_vocab_size)
        .map(|v| format!("d{v:05}"))
        .collect();
    let descriptor_labels = (0..spec.descriptor_vocab_size)
        .map(|v| format!("descriptor {v:05}"))
        .collect();
    let count = |n: usize| TokenCounts {
        raw: (n * spec.num_docs) as u64,
        encoded: (n * spec.num_docs) as u64,
        dropped: 0,
    };
    let report = IngestReport {
        docs_read: spec.num_docs as u64,
        docs_admitted: spec.num_docs as u64,
        words: count(spec.words_per_doc),
        descriptors: count(spec.descriptors_per_doc),
        ..Default::default()
    };
    Ok(SyntheticCorpus {
        corpus: Corpus {
            documents,
            word_vocab,
            descriptor_vocab,
            descriptor_labels,
            num_topics: spec.num_topics,
            report,
        },
        planted_words,
        planted_descriptors,
    })
}

/// Symmetric Dirichlet draw. Small concentrations underflow a plain
/// Gamma(a) sampler, so draws use Gamma(a + 1) * U^(1/a) in log space.
fn dirichlet(rng: &mut SeededRng, concentration: f64, n: usize) -> Vec<f64> {
    let gamma = Gamma::new(concentration + 1.0, 1.0).expect("positive shape");
    let logs: Vec<f64> = (0..n)
        .map(|_| {
            let g: f64 = gamma.sample(rng);
            // 1 - unit is in (0, 1]
            g.ln() + (1.0 - rng::unit(rng)).ln() / concentration
        })
        .collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}
