//! CoNLL-U reading and writing.
//!
//! Output is canonical: ten tab-separated columns, `_` for absent values,
//! LF line endings and one blank line after every sentence. Reading and
//! then writing a canonically formatted document reproduces it byte for
//! byte.

use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

use crate::treebank::{Head, NodeId, Passthrough, Relation, Sentence, SentenceError, Token, Upos};

#[derive(Debug, Error)]
pub enum ConlluError {
    #[error("line {line}: expected 10 tab-separated columns, found {found}")]
    ColumnCount { line: usize, found: usize },
    #[error("line {line}: invalid token id `{value}`")]
    BadId { line: usize, value: String },
    #[error("line {line}: invalid head `{value}`")]
    BadHead { line: usize, value: String },
    #[error("line {line}: head {head} does not exist in the sentence")]
    HeadOutOfRange { line: usize, head: NodeId },
    #[error("line {line}: duplicate node id {id}")]
    DuplicateId { line: usize, id: NodeId },
    #[error("line {line}: node id {id} is out of order")]
    OutOfOrder { line: usize, id: NodeId },
    #[error("line {line}: surface id {id} breaks the 1..n numbering")]
    NonContiguous { line: usize, id: NodeId },
    #[error("line {line}: unknown UPOS `{value}`")]
    BadUpos { line: usize, value: String },
    #[error("line {line}: empty column")]
    EmptyColumn { line: usize },
    #[error("line {line}: token {id} is its own head")]
    SelfHead { line: usize, id: NodeId },
    #[error("line {line}: head and deprel must both be set or both be `_`")]
    HalfAttached { line: usize },
    #[error("sentence {index}: {source}")]
    Invalid {
        index: usize,
        #[source]
        source: SentenceError,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
}

struct Block {
    comments: Vec<String>,
    tokens: Vec<Token>,
    lines: Vec<usize>,
    passthrough: Vec<Passthrough>,
}

impl Block {
    fn new() -> Self {
        Block {
            comments: Vec::new(),
            tokens: Vec::new(),
            lines: Vec::new(),
            passthrough: Vec::new(),
        }
    }

    fn is_empty(&self) -> bool {
        self.comments.is_empty() && self.tokens.is_empty() && self.passthrough.is_empty()
    }

    fn finish(self) -> Result<Sentence, ConlluError> {
        let n = self.tokens.iter().filter(|t| !t.id.is_empty_node()).count() as u32;
        for (t, &line) in self.tokens.iter().zip(&self.lines) {
            if t.id.is_empty_node() && t.id.major > n {
                return Err(ConlluError::OutOfOrder { line, id: t.id });
            }
            if let Head::Node(h) = t.head {
                let exists = self
                    .tokens
                    .binary_search_by(|other| other.id.cmp(&h))
                    .is_ok();
                if !exists {
                    return Err(ConlluError::HeadOutOfRange { line, head: h });
                }
            }
        }
        Ok(Sentence {
            comments: self.comments,
            tokens: self.tokens,
            passthrough: self.passthrough,
        })
    }
}

/// Parses a CoNLL-U document into sentences.
pub fn parse_conllu(text: &str) -> Result<Vec<Sentence>, ConlluError> {
    let mut sentences = Vec::new();
    let mut block = Block::new();

    for (i, raw) in text.split('\n').enumerate() {
        let line_no = i + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);

        if line.trim().is_empty() {
            if !block.is_empty() {
                sentences.push(std::mem::replace(&mut block, Block::new()).finish()?);
            }
            continue;
        }

        if line.starts_with('#') {
            if block.tokens.is_empty() && block.passthrough.is_empty() {
                block.comments.push(line.to_owned());
            } else {
                block.passthrough.push(Passthrough {
                    position: block.tokens.len(),
                    line: line.to_owned(),
                });
            }
            continue;
        }

        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(ConlluError::ColumnCount {
                line: line_no,
                found: cols.len(),
            });
        }
        if cols.iter().any(|c| c.is_empty()) {
            return Err(ConlluError::EmptyColumn { line: line_no });
        }

        if let Some((a, b)) = cols[0].split_once('-') {
            let numeric = |p: &str| !p.is_empty() && p.bytes().all(|c| c.is_ascii_digit());
            if !numeric(a) || !numeric(b) {
                return Err(ConlluError::BadId {
                    line: line_no,
                    value: cols[0].to_owned(),
                });
            }
            block.passthrough.push(Passthrough {
                position: block.tokens.len(),
                line: line.to_owned(),
            });
            continue;
        }

        let token = parse_token(&cols, line_no)?;
        let next_major = block.tokens.iter().filter(|t| !t.id.is_empty_node()).count() as u32 + 1;
        if let Some(prev) = block.tokens.last() {
            if token.id == prev.id {
                return Err(ConlluError::DuplicateId {
                    line: line_no,
                    id: token.id,
                });
            }
            if token.id < prev.id {
                return Err(ConlluError::OutOfOrder {
                    line: line_no,
                    id: token.id,
                });
            }
        }
        if !token.id.is_empty_node() && token.id.major != next_major {
            return Err(ConlluError::NonContiguous {
                line: line_no,
                id: token.id,
            });
        }
        block.tokens.push(token);
        block.lines.push(line_no);
    }

    if !block.is_empty() {
        sentences.push(block.finish()?);
    }
    Ok(sentences)
}

fn parse_token(cols: &[&str], line: usize) -> Result<Token, ConlluError> {
    let id: NodeId = cols[0].parse().map_err(|_| ConlluError::BadId {
        line,
        value: cols[0].to_owned(),
    })?;
    let upos = match cols[3] {
        "_" => None,
        s => Some(s.parse::<Upos>().map_err(|value| ConlluError::BadUpos { line, value })?),
    };
    let head: Head = cols[6].parse().map_err(|_| ConlluError::BadHead {
        line,
        value: cols[6].to_owned(),
    })?;
    let deprel = match cols[7] {
        "_" => None,
        s => Some(Relation::from(s)),
    };
    if head.is_attached() != deprel.is_some() {
        return Err(ConlluError::HalfAttached { line });
    }
    if head == Head::Node(id) {
        return Err(ConlluError::SelfHead { line, id });
    }
    Ok(Token {
        id,
        form: cols[1].to_owned(),
        lemma: cols[2].to_owned(),
        upos,
        xpos: cols[4].to_owned(),
        feats: cols[5].to_owned(),
        head,
        deprel,
        deps: cols[8].to_owned(),
        misc: cols[9].to_owned(),
    })
}

/// Serializes sentences. Every sentence is checked before anything is
/// written.
pub fn write_conllu(sentences: &[Sentence]) -> Result<String, ConlluError> {
    for (index, s) in sentences.iter().enumerate() {
        s.check().map_err(|source| ConlluError::Invalid { index, source })?;
    }
    let mut out = String::new();
    for s in sentences {
        write_sentence(s, &mut out);
    }
    Ok(out)
}

fn write_sentence(s: &Sentence, out: &mut String) {
    for c in &s.comments {
        out.push_str(c);
        out.push('\n');
    }
    let mut pass = s.passthrough.iter().peekable();
    for (i, t) in s.tokens.iter().enumerate() {
        while let Some(p) = pass.next_if(|p| p.position <= i) {
            out.push_str(&p.line);
            out.push('\n');
        }
        write_token(t, out);
    }
    for p in pass {
        out.push_str(&p.line);
        out.push('\n');
    }
    out.push('\n');
}

fn write_token(t: &Token, out: &mut String) {
    let upos = t.upos.map_or("_", Upos::as_str);
    let deprel = t.deprel.as_ref().map_or_else(|| "_".to_owned(), Relation::to_string);
    let cols = [
        t.id.to_string(),
        t.form.clone(),
        t.lemma.clone(),
        upos.to_owned(),
        t.xpos.clone(),
        t.feats.clone(),
        t.head.to_string(),
        deprel,
        t.deps.clone(),
        t.misc.clone(),
    ];
    out.push_str(&cols.join("\t"));
    out.push('\n');
}

pub fn read_file(path: impl AsRef<Path>) -> Result<Vec<Sentence>, ConlluError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ConlluError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_conllu(&text)
}

pub fn write_file(path: impl AsRef<Path>, sentences: &[Sentence]) -> Result<(), ConlluError> {
    let path = path.as_ref();
    let text = write_conllu(sentences)?;
    fs::write(path, text).map_err(|source| ConlluError::Io {
        path: path.display().to_string(),
        source,
    })
}
