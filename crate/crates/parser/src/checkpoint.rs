//! Binary checkpoint container.
//!
//! Layout (little-endian): magic `SCUDPARSE`, `u32` version, `u64` length
//! plus a JSON header (config, vocabularies), `u32` block count, then per
//! block a `u32`-prefixed name, `u32` rank, `u64` dimensions and
//! row-major `f32` values, and finally a CRC-32 of all preceding bytes.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::ParserConfig;
use crate::embeddings::Vocab;
use crate::model::{Model, Params, Weights, POS_ROWS};

pub const MAGIC: &[u8; 9] = b"SCUDPARSE";
pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("not a parser checkpoint (bad magic)")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    UnsupportedVersion(u32),
    #[error("checkpoint is truncated")]
    Truncated,
    #[error("block {block} has shape {found:?}, expected {expected:?}")]
    ShapeMismatch {
        block: String,
        expected: Vec<usize>,
        found: Vec<usize>,
    },
    #[error("checkpoint checksum mismatch")]
    ChecksumMismatch,
    #[error("malformed checkpoint: {0}")]
    Malformed(String),
}

#[derive(Serialize, Deserialize)]
struct Header {
    config: ParserConfig,
    pretrained_rows: usize,
    words: Vec<String>,
    labels: Vec<String>,
}

pub fn to_bytes(model: &Model) -> Vec<u8> {
    let header = Header {
        config: model.config.clone(),
        pretrained_rows: model.pretrained_rows,
        words: model.vocab.words().to_vec(),
        labels: model.labels.clone(),
    };
    let json = serde_json::to_vec(&header).expect("header serializes");
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(json.len() as u64).to_le_bytes());
    out.extend_from_slice(&json);
    let blocks = model.params.blocks();
    out.extend_from_slice(&(blocks.len() as u32).to_le_bytes());
    for (name, array) in blocks {
        out.extend_from_slice(&(name.len() as u32).to_le_bytes());
        out.extend_from_slice(name.as_bytes());
        out.extend_from_slice(&(array.ndim() as u32).to_le_bytes());
        for &d in array.shape() {
            out.extend_from_slice(&(d as u64).to_le_bytes());
        }
        for &v in array.iter() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CheckpointError> {
        let end = self.at.checked_add(n).ok_or(CheckpointError::Truncated)?;
        let out = self.bytes.get(self.at..end).ok_or(CheckpointError::Truncated)?;
        self.at = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32, CheckpointError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64, CheckpointError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn len(&mut self, wide: bool) -> Result<usize, CheckpointError> {
        let v = if wide { self.u64()? } else { self.u32()? as u64 };
        let v = usize::try_from(v).map_err(|_| CheckpointError::Malformed("length overflows".into()))?;
        if v > self.bytes.len() {
            // Cannot fit in the remaining input.
            return Err(CheckpointError::Truncated);
        }
        Ok(v)
    }
}

pub fn from_bytes(bytes: &[u8]) -> Result<Model, CheckpointError> {
    if bytes.len() < MAGIC.len() {
        return Err(if MAGIC.starts_with(bytes) {
            CheckpointError::Truncated
        } else {
            CheckpointError::BadMagic
        });
    }
    let mut r = Reader { bytes, at: 0 };
    if r.take(MAGIC.len())? != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(CheckpointError::UnsupportedVersion(version));
    }
    let json_len = r.len(true)?;
    let header: Header = serde_json::from_slice(r.take(json_len)?)
        .map_err(|e| CheckpointError::Malformed(format!("header: {e}")))?;
    let vocab = Vocab::from_words(&header.words);
    if vocab.len() != header.words.len() || vocab.len() < 2 {
        return Err(CheckpointError::Malformed("word list".into()));
    }
    header
        .config
        .validate()
        .map_err(|e| CheckpointError::Malformed(e.to_string()))?;
    let config = header.config;
    let mut params = Params {
        words: ndarray::Array2::zeros((vocab.len(), config.embed_dim)),
        pos: (config.pos_dim > 0).then(|| ndarray::Array2::zeros((POS_ROWS, config.pos_dim))),
        weights: Weights::zeros(&config, header.labels.len()),
    };
    let count = r.u32()? as usize;
    let mut blocks = params.blocks_mut();
    if count != blocks.len() {
        return Err(CheckpointError::Malformed(format!(
            "{count} parameter blocks, expected {}",
            blocks.len()
        )));
    }
    for (expected_name, target) in &mut blocks {
        let name_len = r.len(false)?;
        let name = std::str::from_utf8(r.take(name_len)?)
            .map_err(|_| CheckpointError::Malformed("block name is not UTF-8".into()))?;
        if name != expected_name {
            return Err(CheckpointError::Malformed(format!(
                "block `{name}` where `{expected_name}` was expected"
            )));
        }
        let rank = r.len(false)?;
        let shape = (0..rank).map(|_| r.len(true)).collect::<Result<Vec<_>, _>>()?;
        if shape != target.shape() {
            return Err(CheckpointError::ShapeMismatch {
                block: name.to_owned(),
                expected: target.shape().to_vec(),
                found: shape,
            });
        }
        let data = r.take(target.len() * 4)?;
        for (dst, chunk) in target.iter_mut().zip(data.chunks_exact(4)) {
            *dst = f32::from_le_bytes(chunk.try_into().expect("4 bytes"));
        }
    }
    drop(blocks);
    let body_end = r.at;
    let crc = r.u32()?;
    if r.at != bytes.len() {
        return Err(CheckpointError::Malformed("trailing bytes".into()));
    }
    if crc32fast::hash(&bytes[..body_end]) != crc {
        return Err(CheckpointError::ChecksumMismatch);
    }
    Ok(Model {
        config,
        vocab,
        labels: header.labels,
        pretrained_rows: header.pretrained_rows,
        params,
    })
}

pub fn save_checkpoint(model: &Model, path: impl AsRef<Path>) -> Result<(), CheckpointError> {
    let path = path.as_ref();
    std::fs::write(path, to_bytes(model)).map_err(|source| CheckpointError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Model, CheckpointError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| CheckpointError::Io {
        path: path.display().to_string(),
        source,
    })?;
    from_bytes(&bytes)
}
