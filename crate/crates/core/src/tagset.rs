//! Closed relation inventories.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use thiserror::Error;

const DEFAULT_TAGSET: &str = include_str!("../data/scud.tagset");

#[derive(Debug, Error)]
pub enum TagsetError {
    #[error("line {line}: `{name}` is not a lowercase relation name")]
    BadName { line: usize, name: String },
    #[error("line {line}: `{name}` is listed twice")]
    Duplicate { line: usize, name: String },
    #[error("tagset does not define `{0}`")]
    Missing(&'static str),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Primary relation names in file order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tagset {
    names: Vec<String>,
    lookup: HashSet<String>,
}

impl Tagset {
    /// Parses a definition: one name per line, `#` starts a comment.
    /// `root` and `preterm` must be present.
    pub fn parse(text: &str) -> Result<Tagset, TagsetError> {
        let mut names = Vec::new();
        let mut lookup = HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if !line.bytes().all(|b| b.is_ascii_lowercase()) {
                return Err(TagsetError::BadName {
                    line: i + 1,
                    name: line.to_owned(),
                });
            }
            if !lookup.insert(line.to_owned()) {
                return Err(TagsetError::Duplicate {
                    line: i + 1,
                    name: line.to_owned(),
                });
            }
            names.push(line.to_owned());
        }
        for required in ["root", "preterm"] {
            if !lookup.contains(required) {
                return Err(TagsetError::Missing(required));
            }
        }
        Ok(Tagset { names, lookup })
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Tagset, TagsetError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| TagsetError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Tagset::parse(&text)
    }

    /// The bundled inventory: UD v2 universal relations plus `preterm`.
    pub fn scud() -> Tagset {
        Tagset::parse(DEFAULT_TAGSET).expect("bundled tagset is valid")
    }

    pub fn default_text() -> &'static str {
        DEFAULT_TAGSET
    }

    pub fn contains(&self, name: &str) -> bool {
        self.lookup.contains(name)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}
