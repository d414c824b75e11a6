//! Ranked descriptor links per class, descriptor suggestions for a set of
//! classes, and the link tree handed to the explorer.

mod tree;

pub use tree::{
    build_link_tree, round_probability, LinkNode, LinkTree, TreeDescriptor, SYNTHETIC_ROOT_CODE,
};

use std::collections::BTreeSet;

use thiserror::Error;

use crate::kos::{ClassificationSystem, Thesaurus};
use crate::model::TrainedModel;

pub const DEFAULT_TOP_K: usize = 5;

/// Classes with fewer descriptor tokens than this at the final state get no
/// links.
pub const LOW_SUPPORT_THRESHOLD: u64 = 10;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LinkError {
    #[error("model has {model} topics but the classification has {classes} classes")]
    TopicMismatch { model: usize, classes: usize },
    #[error("top_k must be at least 1")]
    ZeroTopK,
    #[error("no classes selected")]
    EmptySelection,
    #[error("topic {0} is out of range")]
    UnknownTopic(usize),
    #[error("class {0:?} has no links")]
    MissingClass(String),
    #[error("class {0:?} has links more than once")]
    DuplicateClass(String),
    #[error("tree document: {0}")]
    Format(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedDescriptor {
    pub label: String,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassLinks {
    pub code: String,
    pub topic: usize,
    /// Descending by probability; empty when `low_support`.
    pub descriptors: Vec<RankedDescriptor>,
    pub support: u64,
    pub low_support: bool,
}

/// Indices of the `k` largest entries, descending, ties by lower index.
pub fn top_k_indices(row: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..row.len()).collect();
    let by_rank = |&a: &usize, &b: &usize| row[b].total_cmp(&row[a]).then(a.cmp(&b));
    if k < idx.len() {
        idx.select_nth_unstable_by(k, by_rank);
        idx.truncate(k);
    }
    idx.sort_by(by_rank);
    idx
}

/// The `top_k` most probable descriptors of every class, probabilities taken
/// verbatim from the descriptor rows.
pub fn extract_links(
    model: &TrainedModel,
    classification: &ClassificationSystem,
    thesaurus: &Thesaurus,
    top_k: usize,
) -> Result<Vec<ClassLinks>, LinkError> {
    if model.num_topics != classification.len() {
        return Err(LinkError::TopicMismatch {
            model: model.num_topics,
            classes: classification.len(),
        });
    }
    if top_k == 0 {
        return Err(LinkError::ZeroTopK);
    }
    Ok(classification
        .nodes()
        .iter()
        .enumerate()
        .map(|(topic, node)| {
            let support = model.descriptor_support[topic];
            let low_support = support < LOW_SUPPORT_THRESHOLD;
            let descriptors = if low_support {
                Vec::new()
            } else {
                let row = &model.phi_descriptors[topic];
                top_k_indices(row, top_k)
                    .into_iter()
                    .map(|v| RankedDescriptor {
                        label: preferred_label(model, thesaurus, v),
                        p: row[v],
                    })
                    .collect()
            };
            ClassLinks {
                code: node.code.clone(),
                topic,
                descriptors,
                support,
                low_support,
            }
        })
        .collect())
}

fn preferred_label(model: &TrainedModel, thesaurus: &Thesaurus, v: usize) -> String {
    model
        .descriptor_vocab
        .term(v as u32)
        .and_then(|id| thesaurus.descriptor(id))
        .map(|d| d.preferred_label.clone())
        .unwrap_or_else(|| model.descriptor_labels[v].clone())
}

/// Top `k` descriptors of the uniform mixture of the chosen classes' rows.
/// Low-support classes contribute nothing, matching their empty link lists;
/// if every chosen class is low-support the result is empty.
pub fn suggest_descriptors(
    model: &TrainedModel,
    classes: &[usize],
    k: usize,
) -> Result<Vec<RankedDescriptor>, LinkError> {
    let chosen: BTreeSet<usize> = classes.iter().copied().collect();
    if chosen.is_empty() {
        return Err(LinkError::EmptySelection);
    }
    if let Some(&bad) = chosen.iter().find(|&&t| t >= model.num_topics) {
        return Err(LinkError::UnknownTopic(bad));
    }
    let chosen: Vec<usize> = chosen
        .into_iter()
        .filter(|&t| model.descriptor_support[t] >= LOW_SUPPORT_THRESHOLD)
        .collect();
    if chosen.is_empty() {
        return Ok(Vec::new());
    }
    let weight = 1.0 / chosen.len() as f64;
    let mixture: Vec<f64> = if chosen.len() == 1 {
        model.phi_descriptors[chosen[0]].clone()
    } else {
        let mut m = vec![0.0; model.descriptor_vocab.len()];
        for &t in &chosen {
            for (acc, p) in m.iter_mut().zip(&model.phi_descriptors[t]) {
                *acc += weight * p;
            }
        }
        m
    };
    Ok(top_k_indices(&mixture, k)
        .into_iter()
        .map(|v| RankedDescriptor {
            label: model.descriptor_labels[v].clone(),
            p: mixture[v],
        })
        .collect())
}
