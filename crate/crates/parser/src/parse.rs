//! Inference: tree decoding and labeling of surface tokens.

use rayon::prelude::*;

use scud_core::{Head, NodeId, Relation, Sentence};

use crate::decode::{best_label, decode_square};
use crate::model::{score, Model};

/// Predicted `(head, label index)` per surface token.
pub fn predict(model: &Model, s: &Sentence) -> Vec<(usize, usize)> {
    let ex = model.example(s);
    let n = ex.len();
    if n == 0 {
        return Vec::new();
    }
    let scored = score(&model.params, &model.config, &ex);
    let mut square = vec![vec![f64::NEG_INFINITY; n + 1]; n + 1];
    for (h, row) in square.iter_mut().enumerate() {
        for (d, cell) in row.iter_mut().enumerate().skip(1) {
            if h != d {
                *cell = scored.arcs[[h, d]] as f64;
            }
        }
    }
    let heads = decode_square(&square);
    let root = model.label_index("root");
    heads
        .iter()
        .enumerate()
        .map(|(i, &h)| {
            let label = match (h, root) {
                (0, Some(r)) => r,
                _ => best_label(scored.label_scores(h, i + 1).view(), root),
            };
            (h, label)
        })
        .collect()
}

/// Copy of `s` with every surface token attached. Empty nodes are passed
/// through unchanged.
pub fn parse_sentence(model: &Model, s: &Sentence) -> Sentence {
    let predicted = predict(model, s);
    let ids: Vec<NodeId> = s.surface().map(|t| t.id).collect();
    let mut out = s.clone();
    let mut k = 0;
    for t in out.tokens.iter_mut().filter(|t| !t.id.is_empty_node()) {
        let (h, label) = predicted[k];
        t.head = if h == 0 { Head::Root } else { Head::Node(ids[h - 1]) };
        t.deprel = Some(Relation::new(model.labels[label].clone()));
        k += 1;
    }
    out
}

pub fn parse(model: &Model, sentences: &[Sentence]) -> Vec<Sentence> {
    sentences.par_iter().map(|s| parse_sentence(model, s)).collect()
}
