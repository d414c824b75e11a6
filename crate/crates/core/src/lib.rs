//! Probabilistic links between thesaurus descriptors and the classes of a
//! hierarchical classification system.
//!
//! The pipeline is: parse the two knowledge organization systems ([`kos`]),
//! ingest a jointly annotated corpus ([`corpus`]), fit a labeled two-language
//! topic model with one topic per class ([`model`]), and turn each class's
//! descriptor distribution into ranked links arranged as the classification
//! tree ([`links`]).

pub mod corpus;
pub mod kos;
pub mod links;
pub mod model;
pub mod rng;

pub use corpus::{Corpus, Document, Language};
pub use kos::{ClassificationSystem, Thesaurus};
pub use model::{train, Hyperparameters, ModelState, TrainedModel};
