//! Knowledge organization systems: the hierarchical classification and the
//! thesaurus whose descriptors become link targets.

mod classification;
mod thesaurus;

pub use classification::{ClassNode, ClassificationSystem, DEFAULT_MAX_LEVEL};
pub use thesaurus::{normalize_label, Descriptor, Thesaurus};

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum KosError {
    #[error("empty input")]
    Empty,
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: duplicate class code {code:?}")]
    DuplicateCode { line: usize, code: String },
    #[error("line {line}: class {code:?} references missing parent {parent:?}")]
    MissingParent {
        line: usize,
        code: String,
        parent: String,
    },
    #[error("class {code:?} is part of a parent cycle")]
    Cycle { code: String },
    #[error("class {code:?} is at level {level}, above the bound {max_level}")]
    LevelBound {
        code: String,
        level: usize,
        max_level: usize,
    },
    #[error("line {line}: duplicate descriptor id {id:?}")]
    DuplicateId { line: usize, id: String },
    #[error("line {line}: preferred label {label:?} is already used")]
    DuplicateLabel { line: usize, label: String },
    #[error("line {line}: alt label {label:?} is already claimed by descriptor {owner:?}")]
    DuplicateAlt {
        line: usize,
        label: String,
        owner: String,
    },
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for KosError {
    fn from(e: std::io::Error) -> Self {
        KosError::Io(e.to_string())
    }
}
