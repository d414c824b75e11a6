//! Python bindings: parse the two KOS, ingest documents, train, extract links
//! and export the link tree.

use std::fs::File;
use std::io::{BufReader, BufWriter};

use koslinker::corpus::{self, IngestOptions, SyntheticSpec};
use koslinker::kos;
use koslinker::links::{self, LinkTree};
use koslinker::model;
use pyo3::exceptions::{PyIOError, PyKeyError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn open(path: &str) -> PyResult<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| PyIOError::new_err(format!("{path}: {e}")))
}

fn create(path: &str) -> PyResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| PyIOError::new_err(format!("{path}: {e}")))
}

fn language(name: &str) -> PyResult<corpus::Language> {
    match name {
        "words" => Ok(corpus::Language::Words),
        "descriptors" => Ok(corpus::Language::Descriptors),
        other => Err(PyValueError::new_err(format!(
            "language must be 'words' or 'descriptors', got {other:?}"
        ))),
    }
}

#[pyclass(module = "koslinker_py", frozen)]
struct ClassificationSystem {
    inner: kos::ClassificationSystem,
}

#[pymethods]
impl ClassificationSystem {
    /// Parses `code,name,parent` CSV or JSON lines.
    #[staticmethod]
    #[pyo3(signature = (text, max_level = kos::DEFAULT_MAX_LEVEL))]
    fn parse(text: &str, max_level: usize) -> PyResult<Self> {
        kos::ClassificationSystem::parse_with_max_level(text.as_bytes(), max_level)
            .map(|inner| Self { inner })
            .map_err(value_err)
    }

    #[staticmethod]
    #[pyo3(signature = (path, max_level = kos::DEFAULT_MAX_LEVEL))]
    fn from_file(path: &str, max_level: usize) -> PyResult<Self> {
        kos::ClassificationSystem::parse_with_max_level(open(path)?, max_level)
            .map(|inner| Self { inner })
            .map_err(|e| PyValueError::new_err(format!("{path}: {e}")))
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// Class codes in topic order.
    fn codes(&self) -> Vec<String> {
        self.inner.nodes().iter().map(|n| n.code.clone()).collect()
    }

    fn roots(&self) -> Vec<String> {
        self.inner.roots().to_vec()
    }

    fn topic_of(&self, code: &str) -> Option<usize> {
        self.inner.topic_of(code)
    }

    fn name(&self, code: &str) -> PyResult<String> {
        Ok(self.node(code)?.name.clone())
    }

    fn level(&self, code: &str) -> PyResult<usize> {
        Ok(self.node(code)?.level)
    }

    fn parent(&self, code: &str) -> PyResult<Option<String>> {
        Ok(self.node(code)?.parent_code.clone())
    }

    fn children(&self, code: &str) -> PyResult<Vec<String>> {
        Ok(self.node(code)?.children.clone())
    }

    fn max_level(&self) -> usize {
        self.inner.max_level()
    }

    fn __repr__(&self) -> String {
        format!("ClassificationSystem({} classes)", self.inner.len())
    }
}

impl ClassificationSystem {
    fn node(&self, code: &str) -> PyResult<&kos::ClassNode> {
        self.inner
            .node(code)
            .ok_or_else(|| PyKeyError::new_err(code.to_string()))
    }
}

#[pyclass(module = "koslinker_py", frozen)]
struct Thesaurus {
    inner: kos::Thesaurus,
}

#[pymethods]
impl Thesaurus {
    /// Parses JSON lines of `{"id", "label", "alt"}`.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        kos::Thesaurus::parse(text.as_bytes())
            .map(|inner| Self { inner })
            .map_err(value_err)
    }

    #[staticmethod]
    fn from_file(path: &str) -> PyResult<Self> {
        kos::Thesaurus::parse(open(path)?)
            .map(|inner| Self { inner })
            .map_err(|e| PyValueError::new_err(format!("{path}: {e}")))
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// Descriptor id for a preferred or alternative label, or None.
    fn resolve_label(&self, label: &str) -> Option<String> {
        self.inner.resolve_label(label).map(str::to_string)
    }

    fn preferred_label(&self, id: &str) -> PyResult<String> {
        self.inner
            .descriptor(id)
            .map(|d| d.preferred_label.clone())
            .ok_or_else(|| PyKeyError::new_err(id.to_string()))
    }

    fn ids(&self) -> Vec<String> {
        self.inner
            .descriptors()
            .iter()
            .map(|d| d.id.clone())
            .collect()
    }

    fn __repr__(&self) -> String {
        format!("Thesaurus({} descriptors)", self.inner.len())
    }
}

#[pyclass(module = "koslinker_py", frozen)]
struct Corpus {
    inner: corpus::Corpus,
}

#[pymethods]
impl Corpus {
    /// Encodes JSON-lines documents against the two KOS.
    #[staticmethod]
    #[pyo3(signature = (documents, classification, thesaurus, *, strict = false, min_df = 5,
                        max_df_ratio = 0.5, stopwords = None, propagate_to_ancestors = false))]
    #[allow(clippy::too_many_arguments)]
    fn ingest(
        documents: &str,
        classification: &ClassificationSystem,
        thesaurus: &Thesaurus,
        strict: bool,
        min_df: usize,
        max_df_ratio: f64,
        stopwords: Option<Vec<String>>,
        propagate_to_ancestors: bool,
    ) -> PyResult<Self> {
        let options = IngestOptions {
            strict,
            min_df,
            max_df_ratio,
            tokenizer: corpus::Tokenizer::with_stopwords(stopwords.unwrap_or_default()),
            propagate_to_ancestors,
        };
        corpus::ingest(
            documents.as_bytes(),
            &classification.inner,
            &thesaurus.inner,
            &options,
        )
        .map(|inner| Self { inner })
        .map_err(value_err)
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        corpus::Corpus::read_from(open(path)?)
            .map(|inner| Self { inner })
            .map_err(|e| PyValueError::new_err(format!("{path}: {e}")))
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.inner.write_to(create(path)?).map_err(value_err)
    }

    fn __len__(&self) -> usize {
        self.inner.documents.len()
    }

    #[getter]
    fn num_topics(&self) -> usize {
        self.inner.num_topics
    }

    #[getter]
    fn word_vocab(&self) -> Vec<String> {
        self.inner.word_vocab.terms().to_vec()
    }

    #[getter]
    fn descriptor_vocab(&self) -> Vec<String> {
        self.inner.descriptor_vocab.terms().to_vec()
    }

    #[getter]
    fn descriptor_labels(&self) -> Vec<String> {
        self.inner.descriptor_labels.clone()
    }

    fn token_count(&self, lang: &str) -> PyResult<u64> {
        Ok(self.inner.token_count(language(lang)?))
    }

    /// `{"id", "words", "descriptors", "labels"}` with vocabulary indices.
    fn document<'py>(&self, py: Python<'py>, index: usize) -> PyResult<Bound<'py, PyDict>> {
        let d = self
            .inner
            .documents
            .get(index)
            .ok_or_else(|| pyo3::exceptions::PyIndexError::new_err(index))?;
        let out = PyDict::new(py);
        out.set_item("id", &d.id)?;
        out.set_item("words", &d.word_tokens)?;
        out.set_item("descriptors", &d.descriptor_tokens)?;
        out.set_item("labels", &d.labels)?;
        Ok(out)
    }

    fn report<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let r = &self.inner.report;
        let out = PyDict::new(py);
        out.set_item("docs_read", r.docs_read)?;
        out.set_item("docs_admitted", r.docs_admitted)?;
        out.set_item("docs_dropped_no_labels", r.docs_dropped_no_labels)?;
        out.set_item("docs_dropped_no_tokens", r.docs_dropped_no_tokens)?;
        out.set_item("unknown_classes", r.unknown_classes)?;
        out.set_item("unknown_descriptors", r.unknown_descriptors)?;
        out.set_item("pruned_terms", r.pruned_terms)?;
        for (key, c) in [("words", r.words), ("descriptors", r.descriptors)] {
            let counts = PyDict::new(py);
            counts.set_item("raw", c.raw)?;
            counts.set_item("encoded", c.encoded)?;
            counts.set_item("dropped", c.dropped)?;
            out.set_item(key, counts)?;
        }
        Ok(out)
    }

    fn __repr__(&self) -> String {
        format!(
            "Corpus({} documents, {} words, {} descriptors)",
            self.inner.documents.len(),
            self.inner.word_vocab.len(),
            self.inner.descriptor_vocab.len()
        )
    }
}

#[pyclass(module = "koslinker_py", frozen)]
struct SyntheticCorpus {
    inner: corpus::SyntheticCorpus,
}

#[pymethods]
impl SyntheticCorpus {
    #[getter]
    fn corpus(&self) -> Corpus {
        Corpus {
            inner: self.inner.corpus.clone(),
        }
    }

    /// Indices of the `n` most probable planted descriptors of a topic.
    fn planted_top_descriptors(&self, topic: usize, n: usize) -> PyResult<Vec<usize>> {
        if topic >= self.inner.corpus.num_topics {
            return Err(PyValueError::new_err(format!("topic {topic} out of range")));
        }
        Ok(self.inner.planted_top_descriptors(topic, n))
    }

    /// Writes classification.csv, thesaurus.jsonl and documents.jsonl.
    fn write_sources(&self, directory: &str) -> PyResult<()> {
        self.inner
            .write_sources(std::path::Path::new(directory))
            .map_err(value_err)
    }
}

#[pyfunction]
#[pyo3(signature = (*, num_topics = 10, word_vocab_size = 500, descriptor_vocab_size = 200,
                    num_docs = 2000, words_per_doc = 40, descriptors_per_doc = 10,
                    labels_per_doc = 2, concentration = 0.05, mixture_concentration = 1.0,
                    seed = 1))]
#[allow(clippy::too_many_arguments)]
fn generate_synthetic(
    num_topics: usize,
    word_vocab_size: usize,
    descriptor_vocab_size: usize,
    num_docs: usize,
    words_per_doc: usize,
    descriptors_per_doc: usize,
    labels_per_doc: usize,
    concentration: f64,
    mixture_concentration: f64,
    seed: u64,
) -> PyResult<SyntheticCorpus> {
    let spec = SyntheticSpec {
        num_topics,
        word_vocab_size,
        descriptor_vocab_size,
        num_docs,
        words_per_doc,
        descriptors_per_doc,
        labels_per_doc,
        concentration,
        mixture_concentration,
        seed,
    };
    corpus::generate_synthetic(&spec)
        .map(|inner| SyntheticCorpus { inner })
        .map_err(value_err)
}

#[pyclass(module = "koslinker_py", get_all, set_all, from_py_object)]
#[derive(Clone)]
struct Hyperparameters {
    alpha: f64,
    beta_words: f64,
    beta_descriptors: f64,
    iterations: usize,
    burn_in: usize,
    sample_lag: usize,
    seed: u64,
}

impl From<&Hyperparameters> for model::Hyperparameters {
    fn from(h: &Hyperparameters) -> Self {
        model::Hyperparameters {
            alpha: h.alpha,
            beta_words: h.beta_words,
            beta_descriptors: h.beta_descriptors,
            iterations: h.iterations,
            burn_in: h.burn_in,
            sample_lag: h.sample_lag,
            seed: h.seed,
        }
    }
}

impl From<&model::Hyperparameters> for Hyperparameters {
    fn from(h: &model::Hyperparameters) -> Self {
        Hyperparameters {
            alpha: h.alpha,
            beta_words: h.beta_words,
            beta_descriptors: h.beta_descriptors,
            iterations: h.iterations,
            burn_in: h.burn_in,
            sample_lag: h.sample_lag,
            seed: h.seed,
        }
    }
}

#[pymethods]
impl Hyperparameters {
    #[new]
    #[pyo3(signature = (*, alpha = 0.1, beta_words = 0.01, beta_descriptors = 0.01,
                        iterations = 1000, burn_in = 500, sample_lag = 10, seed = 42))]
    fn new(
        alpha: f64,
        beta_words: f64,
        beta_descriptors: f64,
        iterations: usize,
        burn_in: usize,
        sample_lag: usize,
        seed: u64,
    ) -> PyResult<Self> {
        let h = Hyperparameters {
            alpha,
            beta_words,
            beta_descriptors,
            iterations,
            burn_in,
            sample_lag,
            seed,
        };
        model::Hyperparameters::from(&h)
            .validate()
            .map_err(value_err)?;
        Ok(h)
    }

    fn __repr__(&self) -> String {
        format!(
            "Hyperparameters(alpha={}, beta_words={}, beta_descriptors={}, iterations={}, burn_in={}, sample_lag={}, seed={})",
            self.alpha, self.beta_words, self.beta_descriptors, self.iterations, self.burn_in,
            self.sample_lag, self.seed
        )
    }
}

#[pyclass(module = "koslinker_py", frozen)]
struct TrainedModel {
    inner: model::TrainedModel,
}

#[pymethods]
impl TrainedModel {
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        model::TrainedModel::read_from(open(path)?)
            .map(|inner| Self { inner })
            .map_err(|e| PyValueError::new_err(format!("{path}: {e}")))
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.inner.write_to(create(path)?).map_err(value_err)
    }

    #[getter]
    fn num_topics(&self) -> usize {
        self.inner.num_topics
    }

    #[getter]
    fn samples(&self) -> usize {
        self.inner.samples
    }

    #[getter]
    fn hyperparameters(&self) -> Hyperparameters {
        Hyperparameters::from(&self.inner.hyperparameters)
    }

    #[getter]
    fn log_likelihood(&self) -> Vec<f64> {
        self.inner.log_likelihood.clone()
    }

    #[getter]
    fn descriptor_labels(&self) -> Vec<String> {
        self.inner.descriptor_labels.clone()
    }

    /// Token count per topic at the final state.
    fn support(&self, lang: &str) -> PyResult<Vec<u64>> {
        Ok(match language(lang)? {
            corpus::Language::Words => self.inner.word_support.clone(),
            corpus::Language::Descriptors => self.inner.descriptor_support.clone(),
        })
    }

    /// Topic-term matrix of one language, `[topic][term]`.
    fn phi(&self, lang: &str) -> PyResult<Vec<Vec<f64>>> {
        Ok(self.inner.phi(language(lang)?).to_vec())
    }

    fn __repr__(&self) -> String {
        format!(
            "TrainedModel({} topics, {} samples)",
            self.inner.num_topics, self.inner.samples
        )
    }
}

/// Runs the sampler; the GIL is released while it runs.
#[pyfunction]
#[pyo3(signature = (corpus, hyperparameters = None))]
fn train(
    py: Python<'_>,
    corpus: &Corpus,
    hyperparameters: Option<Hyperparameters>,
) -> PyResult<TrainedModel> {
    let hyper = hyperparameters
        .as_ref()
        .map(model::Hyperparameters::from)
        .unwrap_or_default();
    let corpus = &corpus.inner;
    py.detach(|| model::train(corpus, &hyper))
        .map(|inner| TrainedModel { inner })
        .map_err(value_err)
}

/// Per-class links as dicts `{code, topic, descriptors, support, low_support}`,
/// descriptors as `(label, p)` pairs.
#[pyfunction]
#[pyo3(signature = (model, classification, thesaurus, top_k = links::DEFAULT_TOP_K))]
fn extract_links<'py>(
    py: Python<'py>,
    model: &TrainedModel,
    classification: &ClassificationSystem,
    thesaurus: &Thesaurus,
    top_k: usize,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let all = links::extract_links(&model.inner, &classification.inner, &thesaurus.inner, top_k)
        .map_err(value_err)?;
    all.into_iter()
        .map(|l| {
            let d = PyDict::new(py);
            d.set_item("code", l.code)?;
            d.set_item("topic", l.topic)?;
            let pairs: Vec<(String, f64)> =
                l.descriptors.into_iter().map(|r| (r.label, r.p)).collect();
            d.set_item("descriptors", pairs)?;
            d.set_item("support", l.support)?;
            d.set_item("low_support", l.low_support)?;
            Ok(d)
        })
        .collect()
}

/// Top `k` descriptors of the uniform mixture of the given classes.
#[pyfunction]
#[pyo3(signature = (model, classification, codes, k = links::DEFAULT_TOP_K))]
fn suggest_descriptors(
    model: &TrainedModel,
    classification: &ClassificationSystem,
    codes: Vec<String>,
    k: usize,
) -> PyResult<Vec<(String, f64)>> {
    let topics = codes
        .iter()
        .map(|c| {
            classification
                .inner
                .topic_of(c)
                .ok_or_else(|| PyKeyError::new_err(format!("unknown class code {c:?}")))
        })
        .collect::<PyResult<Vec<usize>>>()?;
    let ranked = links::suggest_descriptors(&model.inner, &topics, k).map_err(value_err)?;
    Ok(ranked.into_iter().map(|r| (r.label, r.p)).collect())
}

/// The link tree as its JSON interchange document.
#[pyfunction]
#[pyo3(signature = (model, classification, thesaurus, top_k = links::DEFAULT_TOP_K))]
fn link_tree_json(
    model: &TrainedModel,
    classification: &ClassificationSystem,
    thesaurus: &Thesaurus,
    top_k: usize,
) -> PyResult<String> {
    Ok(build_tree(model, classification, thesaurus, top_k)?.to_json())
}

/// Writes the link tree to `path`.
#[pyfunction]
#[pyo3(signature = (model, classification, thesaurus, path, top_k = links::DEFAULT_TOP_K))]
fn export_link_tree(
    model: &TrainedModel,
    classification: &ClassificationSystem,
    thesaurus: &Thesaurus,
    path: &str,
    top_k: usize,
) -> PyResult<()> {
    let tree = build_tree(model, classification, thesaurus, top_k)?;
    tree.write_to(create(path)?)
        .map_err(|e| PyIOError::new_err(format!("{path}: {e}")))
}

fn build_tree(
    model: &TrainedModel,
    classification: &ClassificationSystem,
    thesaurus: &Thesaurus,
    top_k: usize,
) -> PyResult<LinkTree> {
    let all = links::extract_links(&model.inner, &classification.inner, &thesaurus.inner, top_k)
        .map_err(value_err)?;
    links::build_link_tree(&classification.inner, &all).map_err(value_err)
}

#[pyfunction]
fn tokenize(text: &str) -> Vec<String> {
    corpus::tokenize(text)
}

#[pyfunction]
fn normalize_label(label: &str) -> String {
    kos::normalize_label(label)
}

#[pymodule]
fn koslinker_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<ClassificationSystem>()?;
    m.add_class::<Thesaurus>()?;
    m.add_class::<Corpus>()?;
    m.add_class::<SyntheticCorpus>()?;
    m.add_class::<Hyperparameters>()?;
    m.add_class::<TrainedModel>()?;
    m.add_function(wrap_pyfunction!(generate_synthetic, m)?)?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    m.add_function(wrap_pyfunction!(extract_links, m)?)?;
    m.add_function(wrap_pyfunction!(suggest_descriptors, m)?)?;
    m.add_function(wrap_pyfunction!(link_tree_json, m)?)?;
    m.add_function(wrap_pyfunction!(export_link_tree, m)?)?;
    m.add_function(wrap_pyfunction!(tokenize, m)?)?;
    m.add_function(wrap_pyfunction!(normalize_label, m)?)?;
    m.add("LOW_SUPPORT_THRESHOLD", links::LOW_SUPPORT_THRESHOLD)?;
    Ok(())
}
