//! Attachment scores and per-relation diagnostics.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::align::{check_aligned, AlignError};
use crate::treebank::{NodeId, Sentence};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error(transparent)]
    Alignment(#[from] AlignError),
    #[error("sentence {sentence}: node {node} is unattached in the {side} corpus")]
    Unattached {
        sentence: usize,
        node: NodeId,
        side: &'static str,
    },
    #[error("no tokens to score")]
    NoTokens,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EvalOptions {
    /// Score empty nodes as well as surface tokens.
    pub include_empty: bool,
    /// Skip tokens whose gold relation is `punct`.
    pub exclude_punct: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelationScore {
    pub relation: String,
    pub gold: usize,
    pub predicted: usize,
    pub correct: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RelationReport {
    pub relations: Vec<RelationScore>,
    /// `(gold, predicted)` relation counts over correctly attached tokens.
    pub confusion: BTreeMap<(String, String), usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalResult {
    pub uas: f64,
    pub las: f64,
    pub token_count: usize,
    pub head_correct: usize,
    pub label_correct: usize,
    pub report: RelationReport,
}

struct Pair<'a> {
    gold_head: crate::treebank::Head,
    pred_head: crate::treebank::Head,
    gold_rel: &'a str,
    pred_rel: &'a str,
}

fn scored_pairs<'a>(
    gold: &'a [Sentence],
    pred: &'a [Sentence],
    options: EvalOptions,
) -> Result<Vec<Pair<'a>>, EvalError> {
    check_aligned(gold, pred)?;
    let mut pairs = Vec::new();
    for (i, (g, p)) in gold.iter().zip(pred).enumerate() {
        for (gt, pt) in g.tokens.iter().zip(&p.tokens) {
            if gt.id.is_empty_node() && !options.include_empty {
                continue;
            }
            let gold_rel = gt.relation().ok_or(EvalError::Unattached {
                sentence: i + 1,
                node: gt.id,
                side: "gold",
            })?;
            let pred_rel = pt.relation().ok_or(EvalError::Unattached {
                sentence: i + 1,
                node: pt.id,
                side: "predicted",
            })?;
            if options.exclude_punct && gold_rel == "punct" {
                continue;
            }
            pairs.push(Pair {
                gold_head: gt.head,
                pred_head: pt.head,
                gold_rel,
                pred_rel,
            });
        }
    }
    Ok(pairs)
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn build_report(pairs: &[Pair]) -> RelationReport {
    let mut gold: BTreeMap<&str, usize> = BTreeMap::new();
    let mut predicted: BTreeMap<&str, usize> = BTreeMap::new();
    let mut correct: BTreeMap<&str, usize> = BTreeMap::new();
    let mut confusion = BTreeMap::new();
    for p in pairs {
        *gold.entry(p.gold_rel).or_insert(0) += 1;
        *predicted.entry(p.pred_rel).or_insert(0) += 1;
        if p.gold_head == p.pred_head {
            *confusion
                .entry((p.gold_rel.to_owned(), p.pred_rel.to_owned()))
                .or_insert(0) += 1;
            if p.gold_rel == p.pred_rel {
                *correct.entry(p.gold_rel).or_insert(0) += 1;
            }
        }
    }
    let mut names: Vec<&str> = gold.keys().chain(predicted.keys()).copied().collect();
    names.sort_unstable();
    names.dedup();
    let relations = names
        .into_iter()
        .map(|name| {
            let g = gold.get(name).copied().unwrap_or(0);
            let pr = predicted.get(name).copied().unwrap_or(0);
            let c = correct.get(name).copied().unwrap_or(0);
            let precision = ratio(c, pr);
            let recall = ratio(c, g);
            let f1 = if precision + recall > 0.0 {
                2.0 * precision * recall / (precision + recall)
            } else {
                0.0
            };
            RelationScore {
                relation: name.to_owned(),
                gold: g,
                predicted: pr,
                correct: c,
                precision,
                recall,
                f1,
            }
        })
        .collect();
    RelationReport { relations, confusion }
}

/// Unlabeled and labeled attachment scores. Labels are compared on
/// primary relation names.
pub fn uas_las(gold: &[Sentence], pred: &[Sentence], options: EvalOptions) -> Result<EvalResult, EvalError> {
    let pairs = scored_pairs(gold, pred, options)?;
    if pairs.is_empty() {
        return Err(EvalError::NoTokens);
    }
    let head_correct = pairs.iter().filter(|p| p.gold_head == p.pred_head).count();
    let label_correct = pairs
        .iter()
        .filter(|p| p.gold_head == p.pred_head && p.gold_rel == p.pred_rel)
        .count();
    let n = pairs.len();
    Ok(EvalResult {
        uas: 100.0 * head_correct as f64 / n as f64,
        las: 100.0 * label_correct as f64 / n as f64,
        token_count: n,
        head_correct,
        label_correct,
        report: build_report(&pairs),
    })
}

pub fn relation_report(
    gold: &[Sentence],
    pred: &[Sentence],
    options: EvalOptions,
) -> Result<RelationReport, EvalError> {
    Ok(build_report(&scored_pairs(gold, pred, options)?))
}

impl RelationReport {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("relation\tgold\tpredicted\tcorrect\tprecision\trecall\tf1\n");
        for r in &self.relations {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{:.4}\t{:.4}\t{:.4}\n",
                r.relation, r.gold, r.predicted, r.correct, r.precision, r.recall, r.f1
            ));
        }
        out
    }

    pub fn confusion_tsv(&self) -> String {
        let mut out = String::from("gold\tpredicted\tcount\n");
        for ((g, p), n) in &self.confusion {
            out.push_str(&format!("{}\t{}\t{}\n", g, p, n));
        }
        out
    }

    pub fn predicted_count(&self, relation: &str) -> usize {
        self.relations
            .iter()
            .find(|r| r.relation == relation)
            .map_or(0, |r| r.predicted)
    }
}
