//! Exact posterior of a tiny corpus by brute force.
//!
//! The oracle scores a full assignment with products of rising factorials
//! (Dirichlet-multinomial normalizers written out term by term), which shares
//! no code with the sampler's gamma-function likelihood or its incremental
//! conditional.

#![allow(dead_code)]

use std::collections::HashMap;

use koslinker::corpus::{Corpus, Document, IngestReport, Vocabulary};
use koslinker::{Hyperparameters, Language, ModelState};

pub fn rising(x: f64, n: u32) -> f64 {
    (0..n).map(|i| x + i as f64).product()
}

/// Unnormalized `p(w, z)`; `z` lists topics for every token, documents in
/// order, words then descriptors.
pub fn joint(corpus: &Corpus, hyper: &Hyperparameters, z: &[u32]) -> f64 {
    let k = corpus.num_topics;
    let mut it = z.iter();
    let mut doc_topic = vec![vec![0u32; k]; corpus.documents.len()];
    let mut topic_term: [HashMap<(u32, u32), u32>; 2] = Default::default();
    let mut topic_total = [vec![0u32; k], vec![0u32; k]];
    for (d, doc) in corpus.documents.iter().enumerate() {
        for lang in Language::ALL {
            for &v in doc.tokens(lang) {
                let t = *it.next().unwrap();
                if !doc.labels.contains(&t) {
                    return 0.0;
                }
                doc_topic[d][t as usize] += 1;
                *topic_term[lang.index()].entry((t, v)).or_default() += 1;
                topic_total[lang.index()][t as usize] += 1;
            }
        }
    }
    let mut p = 1.0;
    for (doc, counts) in corpus.documents.iter().zip(&doc_topic) {
        let m = doc.labels.len() as f64;
        for &l in &doc.labels {
            p *= rising(hyper.alpha, counts[l as usize]);
        }
        p /= rising(m * hyper.alpha, doc.len() as u32);
    }
    for lang in Language::ALL {
        let beta = hyper.beta(lang);
        let vocab = corpus.vocab(lang).len() as f64;
        for &n in topic_term[lang.index()].values() {
            p *= rising(beta, n);
        }
        for &n in &topic_total[lang.index()] {
            p /= rising(vocab * beta, n);
        }
    }
    p
}

pub fn tiny_corpus() -> Corpus {
    let doc = |id: &str, w: Vec<u32>, t: Vec<u32>, labels: Vec<u32>| Document {
        id: id.into(),
        word_tokens: w,
        descriptor_tokens: t,
        labels,
    };
    Corpus {
        documents: vec![
            doc("a", vec![0, 1, 0], vec![0], vec![0, 1]),
            doc("b", vec![1, 2], vec![1, 0], vec![0, 1]),
        ],
        word_vocab: ["w0", "w1", "w2"].iter().collect::<Vocabulary>(),
        descriptor_vocab: ["d0", "d1"].iter().collect::<Vocabulary>(),
        descriptor_labels: vec!["zero".into(), "one".into()],
        num_topics: 2,
        report: IngestReport::default(),
    }
}

pub fn hyper() -> Hyperparameters {
    Hyperparameters {
        alpha: 0.5,
        beta_words: 0.3,
        beta_descriptors: 0.2,
        iterations: 2,
        burn_in: 1,
        sample_lag: 1,
        seed: 2024,
    }
}

pub fn flatten(state: &ModelState) -> Vec<u32> {
    let mut z = Vec::new();
    for d in 0..state.corpus().documents.len() {
        for lang in Language::ALL {
            z.extend_from_slice(state.assignments(d, lang));
        }
    }
    z
}

pub fn to_index(z: &[u32]) -> usize {
    z.iter().fold(0, |acc, &t| acc * 2 + t as usize)
}

/// Exact posterior over all 2^n assignments.
pub fn exact_posterior(corpus: &Corpus, hyper: &Hyperparameters) -> Vec<f64> {
    let n: usize = corpus.documents.iter().map(Document::len).sum();
    let weights: Vec<f64> = (0..1usize << n)
        .map(|code| {
            let z: Vec<u32> = (0..n).rev().map(|b| ((code >> b) & 1) as u32).collect();
            joint(corpus, hyper, &z)
        })
        .collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

/// Total-variation distance between the retained Gibbs samples and the exact
/// posterior.
pub fn sampled_tv(burn_in: usize, samples: usize) -> f64 {
    let corpus = tiny_corpus();
    let hyper = hyper();
    let exact = exact_posterior(&corpus, &hyper);
    let mut state = ModelState::initialize(&corpus, &hyper).unwrap();
    for _ in 0..burn_in {
        state.sweep();
    }
    let mut hits = vec![0usize; exact.len()];
    for _ in 0..samples {
        state.sweep();
        hits[to_index(&flatten(&state))] += 1;
    }
    0.5 * hits
        .iter()
        .zip(&exact)
        .map(|(&h, &p)| (h as f64 / samples as f64 - p).abs())
        .sum::<f64>()
}
