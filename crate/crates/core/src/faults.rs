//! Single-fault injection for exercising the validator.
//!
//! [`inject`] breaks exactly one rule in a sentence that passes all rules,
//! picking the site at random among those where the fault cannot trip any
//! other rule.

use rand::Rng;

use crate::treebank::{Head, NodeId, Relation, Sentence};
use crate::validate::Rule;

/// Relation names that carry their own positional constraints.
const CONSTRAINED: [&str; 6] = ["root", "flat", "goeswith", "reparandum", "preterm", "punct"];

fn free(s: &Sentence, i: usize) -> bool {
    let t = &s.tokens[i];
    !t.id.is_empty_node() && t.relation().is_some_and(|r| !CONSTRAINED.contains(&r))
}

fn head_of(s: &Sentence, i: usize) -> Option<NodeId> {
    s.tokens[i].head.node()
}

fn relabel(s: &Sentence, i: usize, name: &str) -> Sentence {
    let mut out = s.clone();
    out.tokens[i].deprel = Some(Relation::new(name));
    out
}

fn is_descendant(s: &Sentence, node: NodeId, ancestor: NodeId) -> bool {
    let mut cur = s.get(node).and_then(|t| t.head.node());
    let mut steps = 0;
    while let Some(h) = cur {
        if h == ancestor {
            return true;
        }
        steps += 1;
        if steps > s.tokens.len() {
            return false;
        }
        cur = s.get(h).and_then(|t| t.head.node());
    }
    false
}

/// Candidate sites for `rule`; each yields the faulty sentence.
fn sites(s: &Sentence, rule: Rule) -> Vec<Sentence> {
    let n = s.tokens.len();
    let surface_last = s.surface().last().map(|t| t.id);
    let has_preterm = s.tokens.iter().any(|t| t.has_relation("preterm"));
    match rule {
        Rule::R1 => (0..n)
            .filter(|&i| s.tokens[i].head == Head::Root)
            .map(|i| relabel(s, i, "dep"))
            .collect(),
        Rule::R2 => (0..n)
            .filter(|&i| free(s, i))
            .filter_map(|i| {
                let h = head_of(s, i)?;
                let hi = s.index_of(h)?;
                free(s, hi).then(|| {
                    let mut out = s.clone();
                    out.tokens[hi].head = Head::Node(s.tokens[i].id);
                    out
                })
            })
            .collect(),
        Rule::R3 => (0..n).filter(|&i| free(s, i)).map(|i| relabel(s, i, "foo")).collect(),
        Rule::R4 => (0..n)
            .filter(|&i| free(s, i) && head_of(s, i).is_some_and(|h| h > s.tokens[i].id))
            .map(|i| relabel(s, i, "flat"))
            .collect(),
        Rule::R5 => (0..n)
            .filter(|&i| {
                free(s, i)
                    && head_of(s, i).is_some_and(|h| !h.is_empty_node() && h.major + 1 < s.tokens[i].id.major)
            })
            .map(|i| relabel(s, i, "goeswith"))
            .collect(),
        Rule::R6 => (0..n)
            .filter(|&i| free(s, i) && head_of(s, i).is_some_and(|h| h < s.tokens[i].id))
            .map(|i| relabel(s, i, "reparandum"))
            .collect(),
        Rule::R7 if !has_preterm => (0..n)
            .filter(|&i| {
                let id = s.tokens[i].id;
                free(s, i) && Some(id) != surface_last && !s.surface().any(|t| t.id > id && is_descendant(s, t.id, id))
            })
            .map(|i| relabel(s, i, "preterm"))
            .collect(),
        Rule::R7 => Vec::new(),
        Rule::R8 => (0..n).filter(|&i| free(s, i)).map(|i| relabel(s, i, "punct")).collect(),
    }
}

/// Breaks `rule` once in `s`, or returns `None` when the sentence has no
/// suitable site.
pub fn inject<R: Rng>(s: &Sentence, rule: Rule, rng: &mut R) -> Option<Sentence> {
    let mut candidates = sites(s, rule);
    if candidates.is_empty() {
        return None;
    }
    let k = rng.random_range(0..candidates.len());
    Some(candidates.swap_remove(k))
}
