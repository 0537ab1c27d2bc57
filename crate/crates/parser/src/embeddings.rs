//! Word vocabularies and pretrained embedding files.

use std::collections::HashMap;
use std::path::Path;

use ndarray::{Array1, Array2, Axis};
use thiserror::Error;

pub const ROOT: &str = "<root>";
pub const UNK: &str = "<unk>";
pub const ROOT_ID: usize = 0;
pub const UNK_ID: usize = 1;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("line {line}: expected {expected} values, found {found}")]
    Dimension { line: usize, expected: usize, found: usize },
    #[error("line {line}: `{value}` is not a number")]
    BadNumber { line: usize, value: String },
    #[error("line {line}: `{word}` is listed twice")]
    Duplicate { line: usize, word: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Strings to dense row indices. Rows 0 and 1 are always `<root>` and
/// `<unk>`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocab {
    words: Vec<String>,
    index: HashMap<String, usize>,
}

impl Default for Vocab {
    fn default() -> Self {
        Vocab::from_words([ROOT, UNK])
    }
}

impl Vocab {
    /// Builds a vocabulary from an explicit row order; duplicates keep
    /// their first row.
    pub fn from_words<S: AsRef<str>>(words: impl IntoIterator<Item = S>) -> Self {
        let mut v = Vocab {
            words: Vec::new(),
            index: HashMap::new(),
        };
        for w in words {
            v.insert(w.as_ref());
        }
        v
    }

    /// Adds `word` if missing and returns its row.
    pub fn insert(&mut self, word: &str) -> usize {
        if let Some(&i) = self.index.get(word) {
            return i;
        }
        self.words.push(word.to_owned());
        self.index.insert(word.to_owned(), self.words.len() - 1);
        self.words.len() - 1
    }

    pub fn get(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    /// Exact form, then lowercase form, then `<unk>`.
    pub fn lookup(&self, form: &str) -> usize {
        self.get(form)
            .or_else(|| self.get(&form.to_lowercase()))
            .unwrap_or(UNK_ID)
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Pretrained vectors with `<root>` (zeros) and `<unk>` (mean of all
/// loaded vectors) rows in front.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingTable {
    pub vocab: Vocab,
    pub matrix: Array2<f32>,
}

impl EmbeddingTable {
    /// Parses `token v1 ... vD` lines. A leading `count dim` header line,
    /// as written by word2vec, is skipped.
    pub fn parse(text: &str, dim: usize) -> Result<Self, EmbeddingError> {
        let mut vocab = Vocab::default();
        let mut rows: Vec<f32> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            if i == 0 && fields.len() == 2 && dim != 1 && fields.iter().all(|f| f.parse::<usize>().is_ok()) {
                continue;
            }
            let values = &fields[1..];
            if values.len() != dim {
                return Err(EmbeddingError::Dimension {
                    line: line_no,
                    expected: dim,
                    found: values.len(),
                });
            }
            if vocab.get(fields[0]).is_some() {
                return Err(EmbeddingError::Duplicate {
                    line: line_no,
                    word: fields[0].to_owned(),
                });
            }
            for v in values {
                rows.push(v.parse().map_err(|_| EmbeddingError::BadNumber {
                    line: line_no,
                    value: (*v).to_owned(),
                })?);
            }
            vocab.insert(fields[0]);
        }
        let loaded = vocab.len() - 2;
        let vectors = Array2::from_shape_vec((loaded, dim), rows).expect("row count matches");
        let mut matrix = Array2::zeros((vocab.len(), dim));
        if loaded > 0 {
            matrix.row_mut(UNK_ID).assign(&vectors.mean_axis(Axis(0)).expect("non-empty"));
        }
        matrix.slice_mut(ndarray::s![2.., ..]).assign(&vectors);
        Ok(EmbeddingTable { vocab, matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.ncols()
    }

    /// Number of rows loaded from the file.
    pub fn loaded(&self) -> usize {
        self.vocab.len() - 2
    }

    pub fn lookup(&self, form: &str) -> Array1<f32> {
        self.matrix.row(self.vocab.lookup(form)).to_owned()
    }
}

pub fn load_embeddings(path: impl AsRef<Path>, dim: usize) -> Result<EmbeddingTable, EmbeddingError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| EmbeddingError::Io {
        path: path.display().to_string(),
        source,
    })?;
    EmbeddingTable::parse(&text, dim)
}
