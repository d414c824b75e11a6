use std::collections::HashMap;
use std::io::{BufReader, Read};

use serde::Deserialize;

use super::KosError;

/// Hierarchy depth of the classification this tool was designed around.
pub const DEFAULT_MAX_LEVEL: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassNode {
    pub code: String,
    pub name: String,
    pub parent_code: Option<String>,
    /// 1 for top-level classes.
    pub level: usize,
    /// Child codes, in input order.
    pub children: Vec<String>,
}

/// A validated forest of classes. Each class is also a topic: the topic index
/// is the position of the class in a depth-first walk over the input order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassificationSystem {
    nodes: Vec<ClassNode>,
    roots: Vec<String>,
    topic_index: HashMap<String, usize>,
}

#[derive(Debug, Deserialize)]
struct Row {
    code: String,
    name: String,
    #[serde(default)]
    parent: Option<String>,
}

impl ClassificationSystem {
    /// Parses either `code,name,parent` CSV (with header) or one JSON object
    /// per line. The format is picked from the first non-blank character.
    pub fn parse<R: Read>(source: R) -> Result<Self, KosError> {
        Self::parse_with_max_level(source, DEFAULT_MAX_LEVEL)
    }

    pub fn parse_with_max_level<R: Read>(source: R, max_level: usize) -> Result<Self, KosError> {
        let mut text = String::new();
        BufReader::new(source).read_to_string(&mut text)?;
        let text = text.strip_prefix('\u{feff}').unwrap_or(&text);
        let rows = match text.trim_start().chars().next() {
            None => return Err(KosError::Empty),
            Some('{') => parse_jsonl(text)?,
            Some(_) => parse_csv(text)?,
        };
        Self::from_rows(rows, max_level)
    }

    /// Builds from `(code, name, parent)` triples; the line numbers in errors
    /// are the 1-based positions in the iterator.
    pub fn from_records<I, S>(records: I) -> Result<Self, KosError>
    where
        I: IntoIterator<Item = (S, S, Option<S>)>,
        S: Into<String>,
    {
        let rows = records
            .into_iter()
            .enumerate()
            .map(|(i, (code, name, parent))| {
                (
                    i + 1,
                    Row {
                        code: code.into(),
                        name: name.into(),
                        parent: parent.map(Into::into),
                    },
                )
            })
            .collect();
        Self::from_rows(rows, DEFAULT_MAX_LEVEL)
    }

    fn from_rows(rows: Vec<(usize, Row)>, max_level: usize) -> Result<Self, KosError> {
        if rows.is_empty() {
            return Err(KosError::Empty);
        }
        let mut position: HashMap<&str, usize> = HashMap::with_capacity(rows.len());
        for (i, (line, row)) in rows.iter().enumerate() {
            let code = row.code.trim();
            if code.is_empty() {
                return Err(KosError::Syntax {
                    line: *line,
                    message: "empty class code".into(),
                });
            }
            if position.insert(code, i).is_some() {
                return Err(KosError::DuplicateCode {
                    line: *line,
                    code: code.to_string(),
                });
            }
        }

        let parent_of: Vec<Option<usize>> = rows
            .iter()
            .map(|(line, row)| match parent_str(row) {
                None => Ok(None),
                Some(p) => {
                    position
                        .get(p)
                        .copied()
                        .map(Some)
                        .ok_or_else(|| KosError::MissingParent {
                            line: *line,
                            code: row.code.trim().to_string(),
                            parent: p.to_string(),
                        })
                }
            })
            .collect::<Result<_, _>>()?;

        let mut children: Vec<Vec<usize>> = vec![Vec::new(); rows.len()];
        let mut roots = Vec::new();
        for (i, parent) in parent_of.iter().enumerate() {
            match parent {
                Some(p) => children[*p].push(i),
                None => roots.push(i),
            }
        }

        // Preorder walk; anything unreachable from a root sits on a cycle.
        let mut order = Vec::with_capacity(rows.len());
        let mut level = vec![0usize; rows.len()];
        let mut stack: Vec<usize> = roots.iter().rev().copied().collect();
        for &r in &roots {
            level[r] = 1;
        }
        while let Some(i) = stack.pop() {
            order.push(i);
            if level[i] > max_level {
                return Err(KosError::LevelBound {
                    code: rows[i].1.code.trim().to_string(),
                    level: level[i],
                    max_level,
                });
            }
            for &c in children[i].iter().rev() {
                level[c] = level[i] + 1;
                stack.push(c);
            }
        }
        if order.len() != rows.len() {
            let stuck = (0..rows.len()).find(|&i| level[i] == 0).unwrap_or(0);
            return Err(KosError::Cycle {
                code: rows[stuck].1.code.trim().to_string(),
            });
        }

        let code = |i: usize| rows[i].1.code.trim().to_string();
        let nodes: Vec<ClassNode> = order
            .iter()
            .map(|&i| ClassNode {
                code: code(i),
                name: rows[i].1.name.trim().to_string(),
                parent_code: parent_of[i].map(code),
                level: level[i],
                children: children[i].iter().map(|&c| code(c)).collect(),
            })
            .collect();
        let topic_index = nodes
            .iter()
            .enumerate()
            .map(|(t, n)| (n.code.clone(), t))
            .collect();
        Ok(ClassificationSystem {
            nodes,
            roots: roots.into_iter().map(code).collect(),
            topic_index,
        })
    }

    /// Number of classes, which is also the number of topics.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn roots(&self) -> &[String] {
        &self.roots
    }

    pub fn topic_of(&self, code: &str) -> Option<usize> {
        self.topic_index.get(code.trim()).copied()
    }

    pub fn code_of(&self, topic: usize) -> Option<&str> {
        self.nodes.get(topic).map(|n| n.code.as_str())
    }

    pub fn node(&self, code: &str) -> Option<&ClassNode> {
        self.topic_of(code).map(|t| &self.nodes[t])
    }

    pub fn node_at(&self, topic: usize) -> Option<&ClassNode> {
        self.nodes.get(topic)
    }

    /// Nodes in topic order.
    pub fn nodes(&self) -> &[ClassNode] {
        &self.nodes
    }

    pub fn max_level(&self) -> usize {
        self.nodes.iter().map(|n| n.level).max().unwrap_or(0)
    }

    /// Topic indices of the strict ancestors of `topic`, nearest first.
    pub fn ancestors(&self, topic: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut cur = self.nodes.get(topic).and_then(|n| n.parent_code.as_deref());
        while let Some(code) = cur {
            let t = self.topic_index[code];
            out.push(t);
            cur = self.nodes[t].parent_code.as_deref();
        }
        out
    }
}

fn parent_str(row: &Row) -> Option<&str> {
    row.parent
        .as_deref()
        .map(str::trim)
        .filter(|p| !p.is_empty())
}

fn parse_csv(text: &str) -> Result<Vec<(usize, Row)>, KosError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| KosError::Syntax {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    for required in ["code", "name", "parent"] {
        if !headers.iter().any(|h| h == required) {
            return Err(KosError::Syntax {
                line: 1,
                message: format!("header must be `code,name,parent`, missing {required:?}"),
            });
        }
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let syntax = |e: csv::Error| KosError::Syntax {
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            message: e.to_string(),
        };
        let record = record.map_err(syntax)?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let row: Row = record
            .deserialize(Some(&headers))
            .map_err(|e| KosError::Syntax {
                line,
                message: e.to_string(),
            })?;
        rows.push((line, row));
    }
    Ok(rows)
}

fn parse_jsonl(text: &str) -> Result<Vec<(usize, Row)>, KosError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str::<Row>(l)
                .map(|row| (i + 1, row))
                .map_err(|e| KosError::Syntax {
                    line: i + 1,
                    message: e.to_string(),
                })
        })
        .collect()
}
