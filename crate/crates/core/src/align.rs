use thiserror::Error;

use crate::treebank::{NodeId, Sentence};

/// Why two corpora cannot be compared token by token.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum AlignError {
    #[error("sentence counts differ: {left} vs {right}")]
    SentenceCount { left: usize, right: usize },
    #[error("sentence {sentence} ({sent_id}): node sequences diverge at {node}")]
    Nodes {
        sentence: usize,
        sent_id: String,
        node: String,
    },
    #[error("sentence {sentence} ({sent_id}): token {node} is `{left}` vs `{right}`")]
    Form {
        sentence: usize,
        sent_id: String,
        node: NodeId,
        left: String,
        right: String,
    },
}

/// Requires equal sentence counts, identical node ids and identical forms.
pub(crate) fn check_aligned(a: &[Sentence], b: &[Sentence]) -> Result<(), AlignError> {
    if a.len() != b.len() {
        return Err(AlignError::SentenceCount {
            left: a.len(),
            right: b.len(),
        });
    }
    for (i, (x, y)) in a.iter().zip(b).enumerate() {
        let sent_id = || x.sent_id().unwrap_or("-").to_owned();
        let n = x.tokens.len().max(y.tokens.len());
        for k in 0..n {
            match (x.tokens.get(k), y.tokens.get(k)) {
                (Some(l), Some(r)) if l.id == r.id => {
                    if l.form != r.form {
                        return Err(AlignError::Form {
                            sentence: i + 1,
                            sent_id: sent_id(),
                            node: l.id,
                            left: l.form.clone(),
                            right: r.form.clone(),
                        });
                    }
                }
                (l, r) => {
                    let node = l.or(r).map(|t| t.id.to_string()).unwrap_or_default();
                    return Err(AlignError::Nodes {
                        sentence: i + 1,
                        sent_id: sent_id(),
                        node,
                    });
                }
            }
        }
    }
    Ok(())
}
