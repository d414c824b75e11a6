use std::collections::HashMap;
use std::io::{Read, Write};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{ClassLinks, LinkError};
use crate::kos::ClassificationSystem;

/// Code of the node inserted above a classification with several top-level
/// classes.
pub const SYNTHETIC_ROOT_CODE: &str = "ROOT";

const SIGNIFICANT_DIGITS: usize = 6;

/// Rounds to the interchange precision. Idempotent.
pub fn round_probability(p: f64) -> f64 {
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, p)
        .parse()
        .unwrap_or(p)
}

fn ser_probability<S: Serializer>(p: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(round_probability(*p))
}

fn de_probability<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    let p = f64::deserialize(d)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(serde::de::Error::custom(format!(
            "probability {p} out of range"
        )));
    }
    Ok(p)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeDescriptor {
    pub label: String,
    #[serde(
        serialize_with = "ser_probability",
        deserialize_with = "de_probability"
    )]
    pub p: f64,
}

/// One class of the link tree. Field order is the key order of the
/// interchange document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinkNode {
    pub code: String,
    pub name: String,
    pub level: usize,
    pub low_support: bool,
    pub descriptors: Vec<TreeDescriptor>,
    pub children: Vec<LinkNode>,
    /// Descriptor tokens at the final sampler state. Not part of the
    /// interchange document, so it reads back as 0 and equality ignores it.
    #[serde(skip)]
    pub support: u64,
}

impl PartialEq for LinkNode {
    fn eq(&self, other: &Self) -> bool {
        self.code == other.code
            && self.name == other.name
            && self.level == other.level
            && self.low_support == other.low_support
            && self.descriptors == other.descriptors
            && self.children == other.children
    }
}

impl LinkNode {
    pub fn node_count(&self) -> usize {
        1 + self
            .children
            .iter()
            .map(LinkNode::node_count)
            .sum::<usize>()
    }

    /// Preorder traversal.
    pub fn walk<'a>(&'a self, visit: &mut impl FnMut(&'a LinkNode)) {
        visit(self);
        for c in &self.children {
            c.walk(visit);
        }
    }

    pub fn find(&self, code: &str) -> Option<&LinkNode> {
        if self.code == code {
            return Some(self);
        }
        self.children.iter().find_map(|c| c.find(code))
    }
}

/// The classification hierarchy decorated with links. A forest gets a
/// synthetic root at level 0.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkTree {
    pub root: LinkNode,
}

impl LinkTree {
    pub fn node_count(&self) -> usize {
        self.root.node_count()
    }

    /// Pretty-printed JSON with a trailing newline; identical trees give
    /// identical bytes.
    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(&self.root).expect("tree serializes");
        out.push('\n');
        out
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        out.write_all(self.to_json().as_bytes())?;
        out.flush()
    }

    pub fn from_json(text: &str) -> Result<Self, LinkError> {
        let root = serde_json::from_str(text).map_err(|e| LinkError::Format(e.to_string()))?;
        Ok(LinkTree { root })
    }

    pub fn read_from<R: Read>(mut source: R) -> Result<Self, LinkError> {
        let mut text = String::new();
        source
            .read_to_string(&mut text)
            .map_err(|e| LinkError::Format(e.to_string()))?;
        Self::from_json(&text)
    }
}

/// Arranges per-class links as the classification forest. Probabilities are
/// stored at interchange precision.
pub fn build_link_tree(
    classification: &ClassificationSystem,
    links: &[ClassLinks],
) -> Result<LinkTree, LinkError> {
    let mut by_code: HashMap<&str, &ClassLinks> = HashMap::with_capacity(links.len());
    for l in links {
        if classification.node(&l.code).is_none() {
            return Err(LinkError::Format(format!(
                "links for unknown class {:?}",
                l.code
            )));
        }
        if by_code.insert(l.code.as_str(), l).is_some() {
            return Err(LinkError::DuplicateClass(l.code.clone()));
        }
    }
    if let Some(n) = classification
        .nodes()
        .iter()
        .find(|n| !by_code.contains_key(n.code.as_str()))
    {
        return Err(LinkError::MissingClass(n.code.clone()));
    }

    fn build(
        code: &str,
        cs: &ClassificationSystem,
        by_code: &HashMap<&str, &ClassLinks>,
    ) -> LinkNode {
        let node = cs.node(code).expect("validated");
        let links = by_code[code];
        LinkNode {
            code: node.code.clone(),
            name: node.name.clone(),
            level: node.level,
            low_support: links.low_support,
            descriptors: links
                .descriptors
                .iter()
                .map(|d| TreeDescriptor {
                    label: d.label.clone(),
                    p: round_probability(d.p),
                })
                .collect(),
            children: node
                .children
                .iter()
                .map(|c| build(c, cs, by_code))
                .collect(),
            support: links.support,
        }
    }

    let mut roots: Vec<LinkNode> = classification
        .roots()
        .iter()
        .map(|r| build(r, classification, &by_code))
        .collect();
    let root = if roots.len() == 1 {
        roots.pop().unwrap()
    } else {
        LinkNode {
            code: SYNTHETIC_ROOT_CODE.to_string(),
            name: SYNTHETIC_ROOT_CODE.to_string(),
            level: 0,
            low_support: false,
            descriptors: Vec::new(),
            children: roots,
            support: 0,
        }
    };
    Ok(LinkTree { root })
}
