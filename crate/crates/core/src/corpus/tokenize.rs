use std::collections::HashSet;
use std::io::{BufRead, BufReader, Read};

const MIN_TOKEN_CHARS: usize = 2;

/// Splits text into lowercased runs of letters and digits, dropping short
/// tokens and stopwords.
#[derive(Debug, Clone, Default)]
pub struct Tokenizer {
    stopwords: HashSet<String>,
}

impl Tokenizer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_stopwords<I, S>(stopwords: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Tokenizer {
            stopwords: stopwords
                .into_iter()
                .map(|s| s.as_ref().trim().to_lowercase())
                .filter(|s| !s.is_empty())
                .collect(),
        }
    }

    /// One stopword per line; `#` starts a comment line.
    pub fn read_stopwords<R: Read>(source: R) -> std::io::Result<Self> {
        let mut words = Vec::new();
        for line in BufReader::new(source).lines() {
            let line = line?;
            if !line.trim_start().starts_with('#') {
                words.push(line);
            }
        }
        Ok(Self::with_stopwords(words))
    }

    pub fn tokenize(&self, text: &str) -> Vec<String> {
        text.split(|c: char| !c.is_alphanumeric())
            .filter(|run| run.chars().count() >= MIN_TOKEN_CHARS)
            .map(str::to_lowercase)
            .filter(|t| !self.stopwords.contains(t))
            .collect()
    }
}

/// Tokenizes with an empty stopword list.
pub fn tokenize(text: &str) -> Vec<String> {
    Tokenizer::new().tokenize(text)
}
