use statrs::function::gamma::ln_gamma;

use super::{Hyperparameters, ModelError};
use crate::corpus::{Corpus, Language};
use crate::rng::{self, SeededRng};

/// Per-language count tables. `topic_term` is row-major `[topic][term]`.
#[derive(Debug, Clone, PartialEq)]
struct LanguageCounts {
    vocab_size: usize,
    beta: f64,
    topic_term: Vec<u32>,
    topic_total: Vec<u64>,
    phi_accum: Vec<f64>,
}

impl LanguageCounts {
    fn new(num_topics: usize, vocab_size: usize, beta: f64) -> Self {
        LanguageCounts {
            vocab_size,
            beta,
            topic_term: vec![0; num_topics * vocab_size],
            topic_total: vec![0; num_topics],
            phi_accum: vec![0.0; num_topics * vocab_size],
        }
    }

    #[inline]
    fn cell(&self, k: usize, v: usize) -> usize {
        k * self.vocab_size + v
    }

    fn smoothed(&self, k: usize, v: usize) -> f64 {
        let denom = self.topic_total[k] as f64 + self.vocab_size as f64 * self.beta;
        (self.topic_term[self.cell(k, v)] as f64 + self.beta) / denom
    }
}

/// Collapsed Gibbs sampler state for one chain.
///
/// Token assignments are topic indices; `doc_topic[d][j]` counts the tokens of
/// document `d` (both languages) assigned to its `j`-th label, so document
/// counts are supported on the label set by construction.
#[derive(Debug, Clone)]
pub struct ModelState<'c> {
    corpus: &'c Corpus,
    hyper: Hyperparameters,
    assignments: [Vec<Vec<u32>>; 2],
    doc_topic: Vec<Vec<u32>>,
    counts: [LanguageCounts; 2],
    accum_count: usize,
    rng: SeededRng,
    weights: Vec<f64>,
}

impl<'c> ModelState<'c> {
    /// Assigns every token a topic drawn uniformly from its document's labels.
    pub fn initialize(corpus: &'c Corpus, hyper: &Hyperparameters) -> Result<Self, ModelError> {
        let mut rng = rng::seeded(hyper.seed);
        let mut assignments: [Vec<Vec<u32>>; 2] = Default::default();
        for lang in Language::ALL {
            assignments[lang.index()] = corpus
                .documents
                .iter()
                .map(|d| {
                    if d.labels.is_empty() {
                        return Vec::new();
                    }
                    d.tokens(lang)
                        .iter()
                        .map(|_| d.labels[rng::below(&mut rng, d.labels.len())])
                        .collect()
                })
                .collect();
        }
        let mut state = Self::from_assignments(corpus, hyper, assignments)?;
        state.rng = rng;
        Ok(state)
    }

    /// Builds a state from explicit assignments, `[words, descriptors]`, each
    /// indexed `[document][position]`.
    pub fn from_assignments(
        corpus: &'c Corpus,
        hyper: &Hyperparameters,
        assignments: [Vec<Vec<u32>>; 2],
    ) -> Result<Self, ModelError> {
        if corpus.num_topics == 0 {
            return Err(ModelError::NoTopics);
        }
        if let Some(d) = corpus.documents.iter().find(|d| d.labels.is_empty()) {
            return Err(ModelError::EmptyLabels { doc: d.id.clone() });
        }
        let num_topics = corpus.num_topics;
        let mut counts = Language::ALL.map(|lang| {
            LanguageCounts::new(num_topics, corpus.vocab(lang).len(), hyper.beta(lang))
        });
        let mut doc_topic: Vec<Vec<u32>> = corpus
            .documents
            .iter()
            .map(|d| vec![0; d.labels.len()])
            .collect();

        for lang in Language::ALL {
            let z = &assignments[lang.index()];
            if z.len() != corpus.documents.len() {
                return Err(ModelError::InvalidAssignment(format!(
                    "{lang:?}: expected {} documents, got {}",
                    corpus.documents.len(),
                    z.len()
                )));
            }
            let c = &mut counts[lang.index()];
            for (d, doc) in corpus.documents.iter().enumerate() {
                let tokens = doc.tokens(lang);
                if z[d].len() != tokens.len() {
                    return Err(ModelError::InvalidAssignment(format!(
                        "document {:?} {lang:?}: expected {} assignments, got {}",
                        doc.id,
                        tokens.len(),
                        z[d].len()
                    )));
                }
                for (&v, &k) in tokens.iter().zip(&z[d]) {
                    let slot = doc.labels.iter().position(|&l| l == k).ok_or_else(|| {
                        ModelError::InvalidAssignment(format!(
                            "document {:?}: topic {k} is not one of its labels",
                            doc.id
                        ))
                    })?;
                    doc_topic[d][slot] += 1;
                    let cell = c.cell(k as usize, v as usize);
                    c.topic_term[cell] += 1;
                    c.topic_total[k as usize] += 1;
                }
            }
        }

        Ok(ModelState {
            corpus,
            hyper: hyper.clone(),
            assignments,
            doc_topic,
            counts,
            accum_count: 0,
            rng: rng::seeded(hyper.seed),
            weights: Vec::new(),
        })
    }

    pub fn corpus(&self) -> &'c Corpus {
        self.corpus
    }

    pub fn hyperparameters(&self) -> &Hyperparameters {
        &self.hyper
    }

    pub fn num_topics(&self) -> usize {
        self.corpus.num_topics
    }

    /// Topic assigned to each token of document `d` in `lang`.
    pub fn assignments(&self, d: usize, lang: Language) -> &[u32] {
        &self.assignments[lang.index()][d]
    }

    /// Non-zero `(topic, count)` pairs of document `d`, both languages summed.
    pub fn doc_topic_counts(&self, d: usize) -> Vec<(u32, u32)> {
        self.corpus.documents[d]
            .labels
            .iter()
            .zip(&self.doc_topic[d])
            .filter(|(_, &n)| n > 0)
            .map(|(&k, &n)| (k, n))
            .collect()
    }

    pub fn topic_term_count(&self, lang: Language, topic: usize, term: usize) -> u32 {
        let c = &self.counts[lang.index()];
        c.topic_term[c.cell(topic, term)]
    }

    pub fn topic_total(&self, lang: Language, topic: usize) -> u64 {
        self.counts[lang.index()].topic_total[topic]
    }

    /// Full conditional of the topic of one token given all other
    /// assignments, over the document's labels (aligned with `labels`).
    pub fn conditional_distribution(&self, d: usize, lang: Language, position: usize) -> Vec<f64> {
        let doc = &self.corpus.documents[d];
        let v = doc.tokens(lang)[position] as usize;
        let current = self.assignments[lang.index()][d][position];
        let c = &self.counts[lang.index()];
        let alpha = self.hyper.alpha;
        let vbeta = c.vocab_size as f64 * c.beta;
        let weights: Vec<f64> = doc
            .labels
            .iter()
            .zip(&self.doc_topic[d])
            .map(|(&k, &ndk)| {
                let own = u32::from(k == current);
                let ku = k as usize;
                let nkv = c.topic_term[c.cell(ku, v)] - own;
                let nk = c.topic_total[ku] - own as u64;
                (f64::from(ndk - own) + alpha) * (f64::from(nkv) + c.beta) / (nk as f64 + vbeta)
            })
            .collect();
        let total: f64 = weights.iter().sum();
        weights.into_iter().map(|w| w / total).collect()
    }

    /// Resamples every token once: documents in order, words before
    /// descriptors, positions ascending.
    pub fn sweep(&mut self) {
        let alpha = self.hyper.alpha;
        let mut weights = std::mem::take(&mut self.weights);
        for (d, doc) in self.corpus.documents.iter().enumerate() {
            let labels = &doc.labels;
            if labels.len() == 1 {
                // nothing can move
                continue;
            }
            let doc_topic = &mut self.doc_topic[d];
            for lang in Language::ALL {
                let li = lang.index();
                let c = &mut self.counts[li];
                let vbeta = c.vocab_size as f64 * c.beta;
                let z = &mut self.assignments[li][d];
                for (pos, &v) in doc.tokens(lang).iter().enumerate() {
                    let v = v as usize;
                    let old = z[pos];
                    let old_slot = labels.iter().position(|&l| l == old).unwrap();
                    doc_topic[old_slot] -= 1;
                    let cell = c.cell(old as usize, v);
                    c.topic_term[cell] -= 1;
                    c.topic_total[old as usize] -= 1;

                    weights.clear();
                    let mut total = 0.0;
                    for (&k, &ndk) in labels.iter().zip(doc_topic.iter()) {
                        let k = k as usize;
                        let w = (f64::from(ndk) + alpha)
                            * (f64::from(c.topic_term[k * c.vocab_size + v]) + c.beta)
                            / (c.topic_total[k] as f64 + vbeta);
                        total += w;
                        weights.push(w);
                    }
                    let slot = rng::categorical(&mut self.rng, &weights, total);
                    let new = labels[slot];
                    z[pos] = new;
                    doc_topic[slot] += 1;
                    let cell = c.cell(new as usize, v);
                    c.topic_term[cell] += 1;
                    c.topic_total[new as usize] += 1;
                }
            }
        }
        self.weights = weights;
    }

    /// Collapsed joint `log p(w, z)` with the document mixtures integrated over
    /// their label simplices and the topic-term rows integrated per language.
    pub fn log_likelihood(&self) -> f64 {
        let alpha = self.hyper.alpha;
        let lg_alpha = ln_gamma(alpha);
        let mut ll = 0.0;
        for (doc, counts) in self.corpus.documents.iter().zip(&self.doc_topic) {
            let n = doc.len();
            if n == 0 {
                continue;
            }
            let m = doc.labels.len() as f64;
            ll += ln_gamma(m * alpha) - ln_gamma(n as f64 + m * alpha);
            for &ndk in counts.iter().filter(|&&c| c > 0) {
                ll += ln_gamma(f64::from(ndk) + alpha) - lg_alpha;
            }
        }
        for c in &self.counts {
            let vbeta = c.vocab_size as f64 * c.beta;
            let lg_beta = ln_gamma(c.beta);
            for (k, &nk) in c.topic_total.iter().enumerate() {
                if nk == 0 {
                    continue;
                }
                ll += ln_gamma(vbeta) - ln_gamma(nk as f64 + vbeta);
                let row = &c.topic_term[k * c.vocab_size..(k + 1) * c.vocab_size];
                for &nkv in row.iter().filter(|&&n| n > 0) {
                    ll += ln_gamma(f64::from(nkv) + c.beta) - lg_beta;
                }
            }
        }
        ll
    }

    /// Posterior-mean mixture of document `d` over all topics; zero off its
    /// labels.
    pub fn estimate_theta(&self, d: usize) -> Vec<f64> {
        let doc = &self.corpus.documents[d];
        let alpha = self.hyper.alpha;
        let denom = doc.len() as f64 + doc.labels.len() as f64 * alpha;
        let mut theta = vec![0.0; self.num_topics()];
        for (&k, &ndk) in doc.labels.iter().zip(&self.doc_topic[d]) {
            theta[k as usize] = (f64::from(ndk) + alpha) / denom;
        }
        theta
    }

    /// Smoothed topic-term rows of the current assignments.
    pub fn phi(&self, lang: Language) -> Vec<Vec<f64>> {
        let c = &self.counts[lang.index()];
        (0..self.num_topics())
            .map(|k| (0..c.vocab_size).map(|v| c.smoothed(k, v)).collect())
            .collect()
    }

    /// Adds the current smoothed rows to the running sums.
    pub fn accumulate_phi(&mut self) {
        for c in &mut self.counts {
            let vbeta = c.vocab_size as f64 * c.beta;
            for k in 0..c.topic_total.len() {
                let denom = c.topic_total[k] as f64 + vbeta;
                let row = k * c.vocab_size..(k + 1) * c.vocab_size;
                for (acc, &n) in c.phi_accum[row.clone()].iter_mut().zip(&c.topic_term[row]) {
                    *acc += (f64::from(n) + c.beta) / denom;
                }
            }
        }
        self.accum_count += 1;
    }

    pub fn accumulated_samples(&self) -> usize {
        self.accum_count
    }

    /// Mean of the accumulated rows, `None` before the first sample.
    pub fn averaged_phi(&self, lang: Language) -> Option<Vec<Vec<f64>>> {
        if self.accum_count == 0 {
            return None;
        }
        let c = &self.counts[lang.index()];
        let n = self.accum_count as f64;
        Some(
            c.phi_accum
                .chunks(c.vocab_size.max(1))
                .take(self.num_topics())
                .map(|row| row.iter().map(|a| a / n).collect())
                .collect(),
        )
    }

    /// Recounts every table from the assignments and compares with the stored
    /// counts; also checks the label restriction.
    pub fn check_consistency(&self) -> Result<(), String> {
        let fresh =
            ModelState::from_assignments(self.corpus, &self.hyper, self.assignments.clone())
                .map_err(|e| e.to_string())?;
        if fresh.doc_topic != self.doc_topic {
            return Err("document-topic counts differ from a recount".into());
        }
        for lang in Language::ALL {
            let (a, b) = (&fresh.counts[lang.index()], &self.counts[lang.index()]);
            if a.topic_term != b.topic_term {
                return Err(format!("{lang:?} topic-term counts differ from a recount"));
            }
            if a.topic_total != b.topic_total {
                return Err(format!("{lang:?} topic totals differ from a recount"));
            }
        }
        Ok(())
    }
}
