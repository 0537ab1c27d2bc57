//! Agreement between two annotation passes over the same tokens.
//!
//! Agreement is the share of dependencies left unchanged: a node counts
//! as unlabeled agreement when both passes give it the same head, and as
//! labeled agreement when the primary relation names match as well.

use serde::Serialize;
use thiserror::Error;

use crate::align::{check_aligned, AlignError};
use crate::treebank::Sentence;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AgreementError {
    #[error(transparent)]
    Alignment(#[from] AlignError),
    #[error("no attached tokens to compare")]
    NoTokens,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AgreementOptions {
    /// Ignore empty nodes.
    pub surface_only: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SentenceAgreement {
    pub sent_id: String,
    pub tokens: usize,
    pub unlabeled: usize,
    pub labeled: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AgreementResult {
    pub token_count: usize,
    pub unlabeled_matches: usize,
    pub labeled_matches: usize,
    pub unlabeled_pct: f64,
    pub labeled_pct: f64,
    pub sentences: Vec<SentenceAgreement>,
}

impl AgreementResult {
    /// Per-sentence breakdown as TSV.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("sent_id\ttokens\tunlabeled\tlabeled\n");
        for s in &self.sentences {
            out.push_str(&format!("{}\t{}\t{}\t{}\n", s.sent_id, s.tokens, s.unlabeled, s.labeled));
        }
        out
    }
}

/// Compares two passes. A node is counted when it is attached in at
/// least one of them, which keeps the measure symmetric.
pub fn attachment_agreement(
    a: &[Sentence],
    b: &[Sentence],
    options: AgreementOptions,
) -> Result<AgreementResult, AgreementError> {
    check_aligned(a, b)?;
    let mut sentences = Vec::with_capacity(a.len());
    for (i, (x, y)) in a.iter().zip(b).enumerate() {
        let mut row = SentenceAgreement {
            sent_id: crate::validate::sentence_key(x, i),
            tokens: 0,
            unlabeled: 0,
            labeled: 0,
        };
        for (l, r) in x.tokens.iter().zip(&y.tokens) {
            if options.surface_only && l.id.is_empty_node() {
                continue;
            }
            if !l.is_attached() && !r.is_attached() {
                continue;
            }
            row.tokens += 1;
            if l.head == r.head && l.is_attached() {
                row.unlabeled += 1;
                if l.relation() == r.relation() {
                    row.labeled += 1;
                }
            }
        }
        sentences.push(row);
    }
    let token_count: usize = sentences.iter().map(|s| s.tokens).sum();
    if token_count == 0 {
        return Err(AgreementError::NoTokens);
    }
    let unlabeled_matches: usize = sentences.iter().map(|s| s.unlabeled).sum();
    let labeled_matches: usize = sentences.iter().map(|s| s.labeled).sum();
    Ok(AgreementResult {
        token_count,
        unlabeled_matches,
        labeled_matches,
        unlabeled_pct: 100.0 * unlabeled_matches as f64 / token_count as f64,
        labeled_pct: 100.0 * labeled_matches as f64 / token_count as f64,
        sentences,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conllu::parse_conllu;
    use crate::treebank::{Head, NodeId, Relation};

    fn ten_tokens() -> Vec<Sentence> {
        let mut text = String::from("1\tw1\t_\tX\t_\t_\t0\troot\t_\t_\n");
        for i in 2..=10 {
            text.push_str(&format!("{i}\tw{i}\t_\tX\t_\t_\t1\tdep\t_\t_\n"));
        }
        parse_conllu(&text).unwrap()
    }

    #[test]
    fn identical_passes_agree_fully() {
        let a = ten_tokens();
        let r = attachment_agreement(&a, &a, AgreementOptions::default()).unwrap();
        assert_eq!((r.unlabeled_pct, r.labeled_pct), (100.0, 100.0));
        assert_eq!(r.token_count, 10);
    }

    #[test]
    fn hand_counted_fixture() {
        // Two heads changed, one further label changed: 8/10 and 7/10.
        let a = ten_tokens();
        let mut b = a.clone();
        b[0].tokens[3].head = Head::Node(NodeId::surface(3));
        b[0].tokens[4].head = Head::Node(NodeId::surface(3));
        b[0].tokens[5].deprel = Some(Relation::new("obj"));
        let r = attachment_agreement(&a, &b, AgreementOptions::default()).unwrap();
        assert_eq!(r.unlabeled_pct, 80.0);
        assert_eq!(r.labeled_pct, 70.0);
        let back = attachment_agreement(&b, &a, AgreementOptions::default()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn subtypes_are_ignored() {
        let a = ten_tokens();
        let mut b = a.clone();
        b[0].tokens[2].deprel = Some(Relation::with_subtype("dep", "x"));
        let r = attachment_agreement(&a, &b, AgreementOptions::default()).unwrap();
        assert_eq!(r.labeled_pct, 100.0);
    }

    #[test]
    fn misalignment_is_reported() {
        let a = ten_tokens();
        let mut b = a.clone();
        b[0].tokens[6].form = "other".into();
        let err = attachment_agreement(&a, &b, AgreementOptions::default()).unwrap_err();
        assert!(matches!(
            err,
            AgreementError::Alignment(AlignError::Form { sentence: 1, node, .. }) if node == NodeId::surface(7)
        ));
        let err = attachment_agreement(&a, &[], AgreementOptions::default()).unwrap_err();
        assert!(matches!(err, AgreementError::Alignment(AlignError::SentenceCount { .. })));
        let mut c = a.clone();
        c[0].tokens.pop();
        assert!(attachment_agreement(&a, &c, AgreementOptions::default()).is_err());
    }

    #[test]
    fn surface_only_skips_empty_nodes() {
        let text = "0.1\tE1.1\t_\tPRON\t_\t_\t1\tnsubj\t_\t_\n1\tgot\t_\tVERB\t_\t_\t0\troot\t_\t_\n";
        let a = parse_conllu(text).unwrap();
        let mut b = a.clone();
        b[0].tokens[0].deprel = Some(Relation::new("obj"));
        let all = attachment_agreement(&a, &b, AgreementOptions::default()).unwrap();
        assert_eq!(all.labeled_pct, 50.0);
        let surface = attachment_agreement(&a, &b, AgreementOptions { surface_only: true }).unwrap();
        assert_eq!(surface.labeled_pct, 100.0);
        assert_eq!(surface.token_count, 1);
    }
}
