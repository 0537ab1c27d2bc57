//! Flat `key = value` configuration files.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: key `{key}` is set twice")]
    Duplicate { line: usize, key: String },
    #[error("key `{key}`: cannot parse `{value}`")]
    Value { key: String, value: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Parsed `key = value` pairs. Blank lines and `#` comments are ignored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KeyValues {
    entries: BTreeMap<String, String>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(ConfigError::Syntax { line: i + 1 });
            }
            if entries.insert(key.to_owned(), value.trim().to_owned()).is_some() {
                return Err(ConfigError::Duplicate {
                    line: i + 1,
                    key: key.to_owned(),
                });
            }
        }
        Ok(KeyValues { entries })
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        KeyValues::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_owned(), value.into());
    }

    pub fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| ConfigError::Value {
                key: key.to_owned(),
                value: v.to_owned(),
            }),
        }
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> + '_ {
        self.entries.keys().map(String::as_str)
    }

    /// Fails on the first key not in `known`.
    pub fn ensure_known(&self, known: &[&str]) -> Result<(), ConfigError> {
        match self.keys().find(|k| !known.contains(k)) {
            Some(k) => Err(ConfigError::UnknownKey(k.to_owned())),
            None => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_lookup() {
        let kv = KeyValues::parse("# rates\nseed = 7\nfiller=0.25\n\n").unwrap();
        assert_eq!(kv.parsed::<u64>("seed").unwrap(), Some(7));
        assert_eq!(kv.parsed::<f64>("filler").unwrap(), Some(0.25));
        assert_eq!(kv.parsed::<f64>("missing").unwrap(), None);
        assert!(kv.parsed::<u64>("filler").is_err());
        assert!(kv.ensure_known(&["seed"]).is_err());
        assert!(kv.ensure_known(&["seed", "filler"]).is_ok());
    }

    #[test]
    fn syntax_errors() {
        assert!(matches!(KeyValues::parse("a = 1\nb\n"), Err(ConfigError::Syntax { line: 2 })));
        assert!(matches!(
            KeyValues::parse("a = 1\na = 2\n"),
            Err(ConfigError::Duplicate { line: 2, .. })
        ));
    }
}
