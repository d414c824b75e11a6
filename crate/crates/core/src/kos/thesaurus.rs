use std::collections::HashMap;
use std::io::{BufRead, BufReader, Read};

use serde::Deserialize;
use unicode_normalization::UnicodeNormalization;

use super::KosError;

/// Canonical form used for every thesaurus lookup: NFC, lowercased, trimmed,
/// internal whitespace runs collapsed to one space.
pub fn normalize_label(label: &str) -> String {
    let nfc: String = label.nfc().collect();
    let lower = nfc.to_lowercase();
    lower.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Descriptor {
    pub id: String,
    pub preferred_label: String,
    /// Non-descriptors resolving to this descriptor.
    pub alt_labels: Vec<String>,
}

#[derive(Debug, Clone, Default)]
pub struct Thesaurus {
    descriptors: Vec<Descriptor>,
    by_id: HashMap<String, usize>,
    label_index: HashMap<String, usize>,
}

#[derive(Debug, Deserialize)]
struct Row {
    id: String,
    label: String,
    #[serde(default)]
    alt: Vec<String>,
}

impl Thesaurus {
    /// Parses one `{"id", "label", "alt"}` object per line.
    pub fn parse<R: Read>(source: R) -> Result<Self, KosError> {
        let mut thesaurus = Thesaurus::default();
        for (i, line) in BufReader::new(source).lines().enumerate() {
            let line = line?;
            let line = line.trim_start_matches('\u{feff}');
            if line.trim().is_empty() {
                continue;
            }
            let row: Row = serde_json::from_str(line).map_err(|e| KosError::Syntax {
                line: i + 1,
                message: e.to_string(),
            })?;
            thesaurus.insert_at(
                i + 1,
                Descriptor {
                    id: row.id,
                    preferred_label: row.label,
                    alt_labels: row.alt,
                },
            )?;
        }
        Ok(thesaurus)
    }

    pub fn from_descriptors<I>(descriptors: I) -> Result<Self, KosError>
    where
        I: IntoIterator<Item = Descriptor>,
    {
        let mut thesaurus = Thesaurus::default();
        for (i, d) in descriptors.into_iter().enumerate() {
            thesaurus.insert_at(i + 1, d)?;
        }
        Ok(thesaurus)
    }

    fn insert_at(&mut self, line: usize, d: Descriptor) -> Result<(), KosError> {
        let slot = self.descriptors.len();
        if self.by_id.contains_key(&d.id) {
            return Err(KosError::DuplicateId { line, id: d.id });
        }
        let preferred = normalize_label(&d.preferred_label);
        if preferred.is_empty() {
            return Err(KosError::Syntax {
                line,
                message: format!("descriptor {:?} has an empty label", d.id),
            });
        }
        if let Some(&owner) = self.label_index.get(&preferred) {
            let owner = &self.descriptors[owner];
            // a preferred label may not shadow another descriptor's alt either
            return Err(if normalize_label(&owner.preferred_label) == preferred {
                KosError::DuplicateLabel {
                    line,
                    label: d.preferred_label,
                }
            } else {
                KosError::DuplicateAlt {
                    line,
                    label: d.preferred_label,
                    owner: owner.id.clone(),
                }
            });
        }
        let mut alts = Vec::with_capacity(d.alt_labels.len());
        for alt in &d.alt_labels {
            let key = normalize_label(alt);
            if key.is_empty() || key == preferred || alts.contains(&key) {
                continue;
            }
            if let Some(&owner) = self.label_index.get(&key) {
                return Err(KosError::DuplicateAlt {
                    line,
                    label: alt.clone(),
                    owner: self.descriptors[owner].id.clone(),
                });
            }
            alts.push(key);
        }
        self.label_index.insert(preferred, slot);
        for key in alts {
            self.label_index.insert(key, slot);
        }
        self.by_id.insert(d.id.clone(), slot);
        self.descriptors.push(d);
        Ok(())
    }

    /// Descriptor id for a preferred or alternative label.
    pub fn resolve_label(&self, label: &str) -> Option<&str> {
        self.label_index
            .get(&normalize_label(label))
            .map(|&i| self.descriptors[i].id.as_str())
    }

    pub fn descriptor(&self, id: &str) -> Option<&Descriptor> {
        self.by_id.get(id).map(|&i| &self.descriptors[i])
    }

    /// Position of a descriptor in file order.
    pub fn position(&self, id: &str) -> Option<usize> {
        self.by_id.get(id).copied()
    }

    pub fn descriptors(&self) -> &[Descriptor] {
        &self.descriptors
    }

    pub fn len(&self) -> usize {
        self.descriptors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.descriptors.is_empty()
    }
}
