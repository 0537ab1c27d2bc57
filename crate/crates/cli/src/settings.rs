//! Layered settings: command-line flag, then config file, then default.
//!
//! The config file holds `key = value` lines. Keys without a prefix are
//! global (`tagset`, `seed`, `jobs`, `format`); `augment.*` and `parser.*`
//! keys feed the augmenter and parser configurations.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use scud_core::config::KeyValues;
use scud_core::Tagset;

pub const GLOBAL_KEYS: [&str; 4] = ["tagset", "seed", "jobs", "format"];

#[derive(Clone, Debug, Default)]
pub struct ConfigFile {
    pub global: KeyValues,
    pub augment: KeyValues,
    pub parser: KeyValues,
    /// Directory relative paths in the file are resolved against.
    pub base: Option<PathBuf>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<ConfigFile> {
        let Some(path) = path else {
            return Ok(ConfigFile::default());
        };
        let all = KeyValues::from_file(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut out = ConfigFile {
            base: path.parent().map(Path::to_path_buf),
            ..Default::default()
        };
        for key in all.keys() {
            let value = all.get(key).unwrap_or_default();
            match key.split_once('.') {
                Some(("augment", rest)) => out.augment.set(rest, value),
                Some(("parser", rest)) => out.parser.set(rest, value),
                None if GLOBAL_KEYS.contains(&key) => out.global.set(key, value),
                _ => bail!("{}: unknown key `{key}`", path.display()),
            }
        }
        Ok(out)
    }

    pub fn resolve(&self, value: &str) -> PathBuf {
        match &self.base {
            Some(base) => base.join(value),
            None => PathBuf::from(value),
        }
    }

    pub fn seed(&self, flag: Option<u64>) -> Result<u64> {
        Ok(match flag {
            Some(s) => s,
            None => self.global.parsed("seed")?.unwrap_or(42),
        })
    }

    pub fn jobs(&self, flag: Option<usize>) -> Result<Option<usize>> {
        Ok(match flag {
            Some(j) => Some(j),
            None => self.global.parsed("jobs")?,
        })
    }

    pub fn format(&self) -> Option<&str> {
        self.global.get("format")
    }

    /// `--tagset`, then the config file, then `SCUDKIT_TAGSET`, then the
    /// bundled tagset.
    pub fn tagset(&self, flag: Option<&Path>) -> Result<Tagset> {
        let path = match flag {
            Some(p) => Some(p.to_path_buf()),
            None => match self.global.get("tagset") {
                Some(p) => Some(self.resolve(p)),
                None => std::env::var_os("SCUDKIT_TAGSET").map(PathBuf::from),
            },
        };
        match path {
            Some(p) => {
                Tagset::from_file(&p).with_context(|| format!("loading tagset {}", p.display()))
            }
            None => Ok(Tagset::scud()),
        }
    }
}
