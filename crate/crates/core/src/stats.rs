//! Relation distributions, tagset coverage and length statistics.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::tagset::Tagset;
use crate::treebank::Sentence;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StatsError {
    #[error("no attached tokens")]
    NoAttachedTokens,
    #[error("top_k must be positive")]
    ZeroTopK,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelationFrequency {
    pub name: String,
    pub count: usize,
    /// Unrounded share of all attached nodes, in percent.
    pub percent: f64,
}

impl RelationFrequency {
    /// Percentage at one decimal, as shown in tables.
    pub fn rounded(&self) -> f64 {
        round1(self.percent)
    }
}

/// Rounds to one decimal place, halves away from zero.
pub fn round1(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

/// Counts of primary relation names over attached nodes (surface tokens
/// and empty nodes).
pub fn relation_counts(corpus: &[Sentence]) -> BTreeMap<String, usize> {
    let mut counts = BTreeMap::new();
    for t in corpus.iter().flat_map(|s| &s.tokens) {
        if let Some(rel) = t.relation() {
            *counts.entry(rel.to_owned()).or_insert(0) += 1;
        }
    }
    counts
}

/// Relation distribution sorted by descending count, ties by name.
pub fn relation_frequencies(corpus: &[Sentence]) -> Result<Vec<RelationFrequency>, StatsError> {
    frequencies_from_counts(&relation_counts(corpus))
}

pub fn frequencies_from_counts(
    counts: &BTreeMap<String, usize>,
) -> Result<Vec<RelationFrequency>, StatsError> {
    let total: usize = counts.values().sum();
    if total == 0 {
        return Err(StatsError::NoAttachedTokens);
    }
    let mut rows: Vec<_> = counts
        .iter()
        .map(|(name, &count)| RelationFrequency {
            name: name.clone(),
            count,
            percent: 100.0 * count as f64 / total as f64,
        })
        .collect();
    rows.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.name.cmp(&b.name)));
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Coverage {
    pub used: BTreeSet<String>,
    pub unused: BTreeSet<String>,
    /// Observed names that the tagset does not define.
    pub unknown: BTreeSet<String>,
}

pub fn tagset_coverage(corpus: &[Sentence], tagset: &Tagset) -> Coverage {
    let observed: BTreeSet<String> = relation_counts(corpus).into_keys().collect();
    let (used, unknown): (BTreeSet<_>, BTreeSet<_>) =
        observed.into_iter().partition(|n| tagset.contains(n));
    let unused = tagset
        .names()
        .iter()
        .filter(|n| !used.contains(*n))
        .cloned()
        .collect();
    Coverage { used, unused, unknown }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LengthStats {
    pub histogram: BTreeMap<usize, usize>,
    pub sentences: usize,
    pub mean: Option<f64>,
    pub median: Option<f64>,
}

/// Sentence lengths in surface tokens; empty nodes do not count.
pub fn length_histogram(corpus: &[Sentence]) -> LengthStats {
    let mut lengths: Vec<usize> = corpus.iter().map(Sentence::surface_len).collect();
    lengths.sort_unstable();
    let mut histogram = BTreeMap::new();
    for &l in &lengths {
        *histogram.entry(l).or_insert(0) += 1;
    }
    let n = lengths.len();
    let mean = (n > 0).then(|| lengths.iter().sum::<usize>() as f64 / n as f64);
    let median = (n > 0).then(|| {
        if n % 2 == 1 {
            lengths[n / 2] as f64
        } else {
            (lengths[n / 2 - 1] + lengths[n / 2]) as f64 / 2.0
        }
    });
    LengthStats {
        histogram,
        sentences: n,
        mean,
        median,
    }
}

/// Top rows of two relation distributions, side by side.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Comparison {
    pub left: Vec<RelationFrequency>,
    pub right: Vec<RelationFrequency>,
}

pub fn compare_distributions(
    a: &[Sentence],
    b: &[Sentence],
    top_k: usize,
) -> Result<Comparison, StatsError> {
    if top_k == 0 {
        return Err(StatsError::ZeroTopK);
    }
    let mut left = relation_frequencies(a)?;
    let mut right = relation_frequencies(b)?;
    left.truncate(top_k);
    right.truncate(top_k);
    Ok(Comparison { left, right })
}

impl Comparison {
    /// Aligned two-column table with percentages at one decimal.
    pub fn to_table(&self, left_title: &str, right_title: &str) -> String {
        let cell = |r: Option<&RelationFrequency>| match r {
            Some(r) => (r.name.clone(), format!("{:.1}%", r.rounded())),
            None => (String::new(), String::new()),
        };
        let rows = self.left.len().max(self.right.len());
        let mut out = format!("{:<24}  {:<24}\n", left_title, right_title);
        out.push_str(&format!("{:<14}{:>10}  {:<14}{:>10}\n", "Tag", "Freq.", "Tag", "Freq."));
        for i in 0..rows {
            let (ln, lp) = cell(self.left.get(i));
            let (rn, rp) = cell(self.right.get(i));
            let line = format!("{:<14}{:>10}  {:<14}{:>10}", ln, lp, rn, rp);
            out.push_str(line.trim_end());
            out.push('\n');
        }
        out
    }

    pub fn to_tsv(&self, left_title: &str, right_title: &str) -> String {
        let mut out = format!("{0}_tag\t{0}_pct\t{1}_tag\t{1}_pct\n", left_title, right_title);
        for i in 0..self.left.len().max(self.right.len()) {
            let l = self.left.get(i);
            let r = self.right.get(i);
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                l.map_or("", |r| &r.name),
                l.map_or(String::new(), |r| format!("{:.1}", r.rounded())),
                r.map_or("", |r| &r.name),
                r.map_or(String::new(), |r| format!("{:.1}", r.rounded())),
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conllu::parse_conllu;

    fn corpus(sentences: &[&[(&str, &str)]]) -> Vec<Sentence> {
        let text: String = sentences
            .iter()
            .map(|rows| {
                let mut block: String = rows
                    .iter()
                    .enumerate()
                    .map(|(i, (head, rel))| format!("{}\tw\t_\tX\t_\t_\t{head}\t{rel}\t_\t_\n", i + 1))
                    .collect();
                block.push('\n');
                block
            })
            .collect();
        parse_conllu(&text).unwrap()
    }

    #[test]
    fn single_token_corpus() {
        let c = corpus(&[&[("0", "root")]]);
        let f = relation_frequencies(&c).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!((f[0].name.as_str(), f[0].count, f[0].rounded()), ("root", 1, 100.0));
    }

    #[test]
    fn empty_corpus_is_an_error() {
        assert_eq!(relation_frequencies(&[]), Err(StatsError::NoAttachedTokens));
    }

    #[test]
    fn subtypes_collapse_and_ties_break_by_name() {
        let c = corpus(&[&[("0", "root"), ("1", "flat:foreign"), ("1", "flat"), ("1", "amod")]]);
        let f = relation_frequencies(&c).unwrap();
        let names: Vec<_> = f.iter().map(|r| (r.name.as_str(), r.count)).collect();
        assert_eq!(names, [("flat", 2), ("amod", 1), ("root", 1)]);
    }

    #[test]
    fn rounding_is_half_away_from_zero() {
        assert_eq!(round1(12.25), 12.3);
        assert_eq!(round1(0.05), 0.1);
        assert_eq!(round1(33.3333), 33.3);
    }

    #[test]
    fn coverage_of_constructed_fixture() {
        let tagset = Tagset::scud();
        let c = corpus(&[&[("0", "root"), ("1", "nsubj")], &[("2", "nsubj"), ("0", "root")]]);
        let cov = tagset_coverage(&c, &tagset);
        assert_eq!(cov.used.len(), 2);
        assert_eq!(cov.unused.len(), tagset.len() - 2);
        let empty = tagset_coverage(&[], &tagset);
        assert!(empty.used.is_empty());
        assert_eq!(empty.unused.len(), tagset.len());
    }

    #[test]
    fn lengths() {
        let c = corpus(&[&[("0", "root"), ("1", "dep"), ("1", "dep"), ("1", "dep")]]);
        let l = length_histogram(&c);
        assert_eq!(l.histogram, BTreeMap::from([(4, 1)]));
        assert_eq!(l.mean, Some(4.0));

        let c = corpus(&[
            &[("0", "root")],
            &[("0", "root"), ("1", "dep")],
            &[("0", "root"), ("1", "dep"), ("1", "dep")],
        ]);
        let l = length_histogram(&c);
        assert_eq!(l.mean, Some(2.0));
        assert_eq!(l.median, Some(2.0));
        assert_eq!(length_histogram(&[]).mean, None);
    }

    #[test]
    fn comparison_of_equal_corpora() {
        let c = corpus(&[&[("0", "root"), ("1", "nsubj"), ("1", "obj")]]);
        let cmp = compare_distributions(&c, &c, 10).unwrap();
        assert_eq!(cmp.left, cmp.right);
        let table = cmp.to_table("A", "B");
        assert!(table.contains("nsubj"));
        assert_eq!(compare_distributions(&c, &c, 0), Err(StatsError::ZeroTopK));
        let cmp = compare_distributions(&c, &c, 2).unwrap();
        assert_eq!(cmp.left.len(), 2);
    }
}
