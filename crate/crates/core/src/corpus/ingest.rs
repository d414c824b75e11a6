use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, BufReader, Read};

use serde::Deserialize;

use super::{Corpus, CorpusError, Document, IngestReport, Tokenizer, Vocabulary};
use crate::kos::{ClassificationSystem, Thesaurus};

#[derive(Debug, Clone)]
pub struct IngestOptions {
    /// Fail on unknown class codes or unresolvable descriptors instead of
    /// skipping and counting them.
    pub strict: bool,
    pub min_df: usize,
    pub max_df_ratio: f64,
    pub tokenizer: Tokenizer,
    /// Add every ancestor class of a document's classes to its labels.
    /// Experimental; off by default.
    pub propagate_to_ancestors: bool,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            strict: false,
            min_df: 5,
            max_df_ratio: 0.5,
            tokenizer: Tokenizer::new(),
            propagate_to_ancestors: false,
        }
    }
}

impl IngestOptions {
    /// No pruning at all.
    pub fn keep_all() -> Self {
        IngestOptions {
            min_df: 1,
            max_df_ratio: 1.0,
            ..Default::default()
        }
    }
}

#[derive(Debug, Deserialize)]
struct RawDocument {
    id: String,
    #[serde(default, rename = "abstract")]
    text: String,
    #[serde(default)]
    descriptors: Vec<String>,
    #[serde(default)]
    classes: Vec<String>,
}

struct Admitted {
    id: String,
    words: Vec<String>,
    /// Positions in the thesaurus.
    descriptors: Vec<usize>,
    labels: Vec<u32>,
}

/// Reads one JSON document per line and encodes it against the two KOS.
pub fn ingest<R: Read>(
    docs_source: R,
    classification: &ClassificationSystem,
    thesaurus: &Thesaurus,
    options: &IngestOptions,
) -> Result<Corpus, CorpusError> {
    check_prune_options(options.max_df_ratio)?;
    let mut report = IngestReport::default();
    let mut admitted = Vec::new();

    for (i, line) in BufReader::new(docs_source).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawDocument = serde_json::from_str(&line).map_err(|e| CorpusError::Syntax {
            line: i + 1,
            message: e.to_string(),
        })?;
        report.docs_read += 1;

        let words = options.tokenizer.tokenize(&raw.text);
        report.words.raw += words.len() as u64;
        report.descriptors.raw += raw.descriptors.len() as u64;

        let mut descriptors = Vec::with_capacity(raw.descriptors.len());
        for label in &raw.descriptors {
            match thesaurus
                .resolve_label(label)
                .and_then(|id| thesaurus.position(id))
            {
                Some(pos) => descriptors.push(pos),
                None if options.strict => {
                    return Err(CorpusError::UnknownDescriptor {
                        doc: raw.id,
                        label: label.clone(),
                    })
                }
                None => {
                    report.unknown_descriptors += 1;
                    report.descriptors.dropped += 1;
                }
            }
        }

        let mut labels = BTreeSet::new();
        for code in &raw.classes {
            match classification.topic_of(code) {
                Some(t) => {
                    labels.insert(t as u32);
                    if options.propagate_to_ancestors {
                        labels.extend(classification.ancestors(t).into_iter().map(|a| a as u32));
                    }
                }
                None if options.strict => {
                    return Err(CorpusError::UnknownClass {
                        doc: raw.id,
                        code: code.clone(),
                    })
                }
                None => report.unknown_classes += 1,
            }
        }

        let drop_all = |report: &mut IngestReport| {
            report.words.dropped += words.len() as u64;
            report.descriptors.dropped += descriptors.len() as u64;
        };
        if labels.is_empty() {
            report.docs_dropped_no_labels += 1;
            drop_all(&mut report);
            continue;
        }
        if words.is_empty() && descriptors.is_empty() {
            report.docs_dropped_no_tokens += 1;
            continue;
        }
        admitted.push(Admitted {
            id: raw.id,
            words,
            descriptors,
            labels: labels.into_iter().collect(),
        });
    }

    // Vocabularies are finalized after counting so the result does not depend
    // on document order: words sorted, descriptors in thesaurus order.
    let word_vocab: Vocabulary = admitted
        .iter()
        .flat_map(|d| d.words.iter())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let used: BTreeSet<usize> = admitted
        .iter()
        .flat_map(|d| d.descriptors.iter().copied())
        .collect();
    let mut descriptor_slot = BTreeMap::new();
    let mut descriptor_vocab = Vocabulary::new();
    let mut descriptor_labels = Vec::with_capacity(used.len());
    for pos in used {
        let d = &thesaurus.descriptors()[pos];
        descriptor_slot.insert(pos, descriptor_vocab.intern(&d.id));
        descriptor_labels.push(d.preferred_label.clone());
    }

    let documents: Vec<Document> = admitted
        .into_iter()
        .map(|a| Document {
            word_tokens: a.words.iter().map(|w| word_vocab.id(w).unwrap()).collect(),
            descriptor_tokens: a.descriptors.iter().map(|p| descriptor_slot[p]).collect(),
            labels: a.labels,
            id: a.id,
        })
        .collect();
    report.docs_admitted = documents.len() as u64;
    report.words.encoded = documents.iter().map(|d| d.word_tokens.len() as u64).sum();
    report.descriptors.encoded = documents
        .iter()
        .map(|d| d.descriptor_tokens.len() as u64)
        .sum();

    let corpus = Corpus {
        documents,
        word_vocab,
        descriptor_vocab,
        descriptor_labels,
        num_topics: classification.len(),
        report,
    };
    prune_vocabulary(corpus, options.min_df, options.max_df_ratio)
}

fn check_prune_options(max_df_ratio: f64) -> Result<(), CorpusError> {
    if !(0.0..=1.0).contains(&max_df_ratio) {
        return Err(CorpusError::InvalidOption(format!(
            "max_df_ratio must be in [0, 1], got {max_df_ratio}"
        )));
    }
    Ok(())
}

/// Keeps words whose document frequency lies in `[min_df, max_df_ratio * D]`.
/// Descriptors are never pruned. Documents left without any token are dropped
/// and counted in the report.
pub fn prune_vocabulary(
    mut corpus: Corpus,
    min_df: usize,
    max_df_ratio: f64,
) -> Result<Corpus, CorpusError> {
    check_prune_options(max_df_ratio)?;
    let num_docs = corpus.documents.len();
    let mut df = vec![0usize; corpus.word_vocab.len()];
    for d in &corpus.documents {
        let distinct: BTreeSet<u32> = d.word_tokens.iter().copied().collect();
        for w in distinct {
            df[w as usize] += 1;
        }
    }
    let max_df = max_df_ratio * num_docs as f64;
    let keep = |w: usize| df[w] >= min_df && df[w] as f64 <= max_df;
    if (0..df.len()).all(keep) {
        return Ok(corpus);
    }

    let mut remap = vec![u32::MAX; df.len()];
    let mut vocab = Vocabulary::new();
    for (w, term) in corpus.word_vocab.terms().iter().enumerate() {
        if keep(w) {
            remap[w] = vocab.intern(term);
        }
    }
    let before = corpus.token_count(super::Language::Words);
    for d in &mut corpus.documents {
        d.word_tokens = d
            .word_tokens
            .iter()
            .filter_map(|&w| Some(remap[w as usize]).filter(|&n| n != u32::MAX))
            .collect();
    }
    let after = corpus.token_count(super::Language::Words);
    if before > 0 && after == 0 {
        return Err(CorpusError::EmptyAfterPruning);
    }

    let report = &mut corpus.report;
    report.pruned_terms += (corpus.word_vocab.len() - vocab.len()) as u64;
    report.words.encoded -= before - after;
    report.words.dropped += before - after;
    let admitted = corpus.documents.len();
    corpus.documents.retain(|d| !d.is_empty());
    report.docs_dropped_no_tokens += (admitted - corpus.documents.len()) as u64;
    report.docs_admitted = corpus.documents.len() as u64;
    corpus.word_vocab = vocab;
    Ok(corpus)
}
