//! Annotated documents encoded against two vocabularies: abstract words and
//! thesaurus descriptors.

mod ingest;
mod synthetic;
mod tokenize;
mod vocab;

pub use ingest::{ingest, prune_vocabulary, IngestOptions};
pub use synthetic::{class_code, generate_synthetic, SyntheticCorpus, SyntheticSpec};
pub use tokenize::{tokenize, Tokenizer};
pub use vocab::Vocabulary;

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const CORPUS_FORMAT: &str = "koslinker-corpus";
pub const CORPUS_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("document {doc:?}: unknown class code {code:?}")]
    UnknownClass { doc: String, code: String },
    #[error("document {doc:?}: descriptor {label:?} does not resolve in the thesaurus")]
    UnknownDescriptor { doc: String, label: String },
    #[error("invalid option: {0}")]
    InvalidOption(String),
    #[error("vocabulary pruning removed every word token")]
    EmptyAfterPruning,
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
    #[error("corpus file: {0}")]
    Format(String),
}

/// The two observation languages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Language {
    Words,
    Descriptors,
}

impl Language {
    pub const ALL: [Language; 2] = [Language::Words, Language::Descriptors];

    pub fn index(self) -> usize {
        match self {
            Language::Words => 0,
            Language::Descriptors => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub word_tokens: Vec<u32>,
    pub descriptor_tokens: Vec<u32>,
    /// Topic indices, ascending and distinct.
    pub labels: Vec<u32>,
}

impl Document {
    pub fn tokens(&self, lang: Language) -> &[u32] {
        match lang {
            Language::Words => &self.word_tokens,
            Language::Descriptors => &self.descriptor_tokens,
        }
    }

    pub fn len(&self) -> usize {
        self.word_tokens.len() + self.descriptor_tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenCounts {
    pub raw: u64,
    pub encoded: u64,
    pub dropped: u64,
}

impl TokenCounts {
    pub fn reconciles(&self) -> bool {
        self.raw == self.encoded + self.dropped
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub docs_read: u64,
    pub docs_admitted: u64,
    pub docs_dropped_no_labels: u64,
    pub docs_dropped_no_tokens: u64,
    pub unknown_classes: u64,
    pub unknown_descriptors: u64,
    pub pruned_terms: u64,
    pub words: TokenCounts,
    pub descriptors: TokenCounts,
}

impl IngestReport {
    pub fn docs_dropped(&self) -> u64 {
        self.docs_dropped_no_labels + self.docs_dropped_no_tokens
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub documents: Vec<Document>,
    pub word_vocab: Vocabulary,
    /// Descriptor ids.
    pub descriptor_vocab: Vocabulary,
    /// Preferred label of each descriptor-vocabulary entry.
    pub descriptor_labels: Vec<String>,
    pub num_topics: usize,
    pub report: IngestReport,
}

#[derive(Serialize, Deserialize)]
struct CorpusFile<C> {
    format: String,
    version: u32,
    corpus: C,
}

impl Corpus {
    pub fn vocab(&self, lang: Language) -> &Vocabulary {
        match lang {
            Language::Words => &self.word_vocab,
            Language::Descriptors => &self.descriptor_vocab,
        }
    }

    pub fn token_count(&self, lang: Language) -> u64 {
        self.documents
            .iter()
            .map(|d| d.tokens(lang).len() as u64)
            .sum()
    }

    pub fn write_to<W: Write>(&self, out: W) -> Result<(), CorpusError> {
        let file = CorpusFile {
            format: CORPUS_FORMAT.to_string(),
            version: CORPUS_VERSION,
            corpus: self,
        };
        serde_json::to_writer(out, &file).map_err(|e| CorpusError::Format(e.to_string()))
    }

    pub fn read_from<R: Read>(source: R) -> Result<Self, CorpusError> {
        let file: CorpusFile<Corpus> = serde_json::from_reader(std::io::BufReader::new(source))
            .map_err(|e| CorpusError::Format(e.to_string()))?;
        if file.format != CORPUS_FORMAT || file.version != CORPUS_VERSION {
            return Err(CorpusError::Format(format!(
                "expected {CORPUS_FORMAT} v{CORPUS_VERSION}, found {} v{}",
                file.format, file.version
            )));
        }
        file.corpus.validate()?;
        Ok(file.corpus)
    }

    /// Checks the token-range and label invariants.
    pub fn validate(&self) -> Result<(), CorpusError> {
        let bad = |m: String| Err(CorpusError::Format(m));
        if self.descriptor_labels.len() != self.descriptor_vocab.len() {
            return bad("descriptor labels do not match the descriptor vocabulary".into());
        }
        for d in &self.documents {
            for lang in Language::ALL {
                let v = self.vocab(lang).len() as u32;
                if d.tokens(lang).iter().any(|&t| t >= v) {
                    return bad(format!("document {:?} has an out-of-range token", d.id));
                }
            }
            if d.labels.iter().any(|&k| k as usize >= self.num_topics) {
                return bad(format!("document {:?} has an out-of-range label", d.id));
            }
            if d.labels.windows(2).any(|w| w[0] >= w[1]) {
                return bad(format!(
                    "document {:?} labels are not sorted and distinct",
                    d.id
                ));
            }
        }
        Ok(())
    }
}
