//! Structural and scheme-specific checks over annotated sentences.
//!
//! Rules R1-R4 are structural and reported as errors. R5-R8 encode
//! positional conventions for spoken-dialog phenomena and are reported as
//! warnings.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;

use crate::tagset::Tagset;
use crate::treebank::{Head, NodeId, Sentence};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Rule {
    R1,
    R2,
    R3,
    R4,
    R5,
    R6,
    R7,
    R8,
}

impl Rule {
    pub const ALL: [Rule; 8] = [
        Rule::R1,
        Rule::R2,
        Rule::R3,
        Rule::R4,
        Rule::R5,
        Rule::R6,
        Rule::R7,
        Rule::R8,
    ];

    pub fn severity(self) -> Severity {
        match self {
            Rule::R1 | Rule::R2 | Rule::R3 | Rule::R4 => Severity::Error,
            _ => Severity::Warning,
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Rule::R1 => "exactly one token attached to ROOT, labeled root",
            Rule::R2 => "surface tree is acyclic and connected",
            Rule::R3 => "relation names belong to the tagset",
            Rule::R4 => "flat and goeswith dependents follow their head",
            Rule::R5 => "goeswith joins adjacent surface tokens",
            Rule::R6 => "reparandum precedes its repair",
            Rule::R7 => "preterm only on the final span of the utterance",
            Rule::R8 => "no punctuation in transcripts",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self)
    }
}

impl std::str::FromStr for Rule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Rule::ALL
            .iter()
            .copied()
            .find(|r| r.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown rule `{}`", s))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

/// Which rules run. All are enabled by default.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RuleSet {
    disabled: BTreeSet<Rule>,
}

impl RuleSet {
    pub fn all() -> Self {
        RuleSet::default()
    }

    pub fn without(mut self, rule: Rule) -> Self {
        self.disabled.insert(rule);
        self
    }

    pub fn only(rules: &[Rule]) -> Self {
        RuleSet {
            disabled: Rule::ALL.iter().copied().filter(|r| !rules.contains(r)).collect(),
        }
    }

    pub fn is_enabled(&self, rule: Rule) -> bool {
        !self.disabled.contains(&rule)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub sent_id: String,
    pub node: Option<NodeId>,
    pub rule: Rule,
    pub severity: Severity,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub counts: BTreeMap<Rule, usize>,
}

impl ValidationReport {
    fn from_violations(mut violations: Vec<Violation>) -> Self {
        violations.sort_by(|a, b| {
            (&a.sent_id, a.rule, a.node, &a.message).cmp(&(&b.sent_id, b.rule, b.node, &b.message))
        });
        let mut counts = BTreeMap::new();
        for v in &violations {
            *counts.entry(v.rule).or_insert(0) += 1;
        }
        ValidationReport { violations, counts }
    }

    /// Combines two reports; the result does not depend on merge order.
    pub fn merge(self, other: ValidationReport) -> ValidationReport {
        let mut all = self.violations;
        all.extend(other.violations);
        ValidationReport::from_violations(all)
    }

    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn error_count(&self) -> usize {
        self.violations.iter().filter(|v| v.severity == Severity::Error).count()
    }

    pub fn warning_count(&self) -> usize {
        self.violations.len() - self.error_count()
    }

    pub fn errors(&self) -> impl Iterator<Item = &Violation> + '_ {
        self.violations.iter().filter(|v| v.severity == Severity::Error)
    }

    pub fn rules_fired(&self) -> BTreeSet<Rule> {
        self.counts.keys().copied().collect()
    }

    /// Line-oriented form: one tab-separated line per violation followed
    /// by a `#`-prefixed summary block.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for v in &self.violations {
            let node = v.node.map_or_else(|| "-".to_owned(), |n| n.to_string());
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                v.sent_id, node, v.rule, v.severity, v.message
            ));
        }
        out.push_str(&format!("# errors\t{}\n", self.error_count()));
        out.push_str(&format!("# warnings\t{}\n", self.warning_count()));
        for (rule, n) in &self.counts {
            out.push_str(&format!("# {}\t{}\n", rule, n));
        }
        out
    }
}

/// Key used for a sentence in reports: its `sent_id`, or `#<n>` with the
/// 1-based corpus position when it has none.
pub fn sentence_key(s: &Sentence, index: usize) -> String {
    s.sent_id()
        .map(str::to_owned)
        .unwrap_or_else(|| format!("#{}", index + 1))
}

pub fn validate_sentence(s: &Sentence, tagset: &Tagset, rules: &RuleSet) -> ValidationReport {
    let key = s.sent_id().unwrap_or("-").to_owned();
    ValidationReport::from_violations(check_sentence(s, &key, tagset, rules))
}

pub fn validate_corpus(sentences: &[Sentence], tagset: &Tagset, rules: &RuleSet) -> ValidationReport {
    let all = sentences
        .iter()
        .enumerate()
        .flat_map(|(i, s)| check_sentence(s, &sentence_key(s, i), tagset, rules))
        .collect();
    ValidationReport::from_violations(all)
}

/// Per-sentence check with an explicit report key.
pub fn validate_keyed(s: &Sentence, key: &str, tagset: &Tagset, rules: &RuleSet) -> ValidationReport {
    ValidationReport::from_violations(check_sentence(s, key, tagset, rules))
}

struct Collector<'a> {
    key: &'a str,
    rules: &'a RuleSet,
    out: Vec<Violation>,
}

impl Collector<'_> {
    fn add(&mut self, rule: Rule, node: Option<NodeId>, message: String) {
        if self.rules.is_enabled(rule) {
            self.out.push(Violation {
                sent_id: self.key.to_owned(),
                node,
                rule,
                severity: rule.severity(),
                message,
            });
        }
    }
}

fn check_sentence(s: &Sentence, key: &str, tagset: &Tagset, rules: &RuleSet) -> Vec<Violation> {
    let mut c = Collector {
        key,
        rules,
        out: Vec::new(),
    };
    check_root(s, &mut c);
    check_tree(s, &mut c);

    for t in s.tokens.iter().filter(|t| t.is_attached()) {
        let Some(rel) = t.relation() else { continue };
        if !tagset.contains(rel) {
            c.add(Rule::R3, Some(t.id), format!("relation `{}` is not in the tagset", rel));
        }
        let Head::Node(h) = t.head else { continue };
        match rel {
            "flat" | "goeswith" if h > t.id => {
                c.add(Rule::R4, Some(t.id), format!("{} dependent precedes its head {}", rel, h));
            }
            "reparandum" if t.id > h => {
                c.add(Rule::R6, Some(t.id), format!("reparandum follows its repair {}", h));
            }
            _ => {}
        }
        if rel == "goeswith" {
            let adjacent = !t.id.is_empty_node()
                && !h.is_empty_node()
                && t.id.major.abs_diff(h.major) == 1;
            if !adjacent {
                c.add(Rule::R5, Some(t.id), format!("goeswith spans non-adjacent nodes {} and {}", h, t.id));
            }
        }
        if rel == "punct" {
            c.add(Rule::R8, Some(t.id), "punctuation token in a transcript".to_owned());
        }
    }

    check_preterm_span(s, &mut c);
    c.out
}

fn check_root(s: &Sentence, c: &mut Collector) {
    let roots: Vec<_> = s.tokens.iter().filter(|t| t.head == Head::Root).collect();
    match roots.len() {
        0 => {
            let incomplete = s.is_partial() && s.tokens.iter().any(|t| !t.is_attached());
            if !incomplete {
                c.add(Rule::R1, None, "no token is attached to ROOT".to_owned());
            }
        }
        1 => {}
        n => c.add(Rule::R1, Some(roots[1].id), format!("{} tokens are attached to ROOT", n)),
    }
    for t in &s.tokens {
        let labeled_root = t.has_relation("root");
        if t.head == Head::Root && !labeled_root {
            let rel = t.relation().unwrap_or("_");
            c.add(Rule::R1, Some(t.id), format!("ROOT dependent labeled `{}` instead of root", rel));
        } else if labeled_root && t.head != Head::Root {
            c.add(Rule::R1, Some(t.id), format!("token labeled root is attached to {}", t.head));
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Reach {
    Root,
    Dead,
}

fn check_tree(s: &Sentence, c: &mut Collector) {
    let partial = s.is_partial();
    let mut known: HashMap<NodeId, Reach> = HashMap::new();
    let mut reported_cycles: BTreeSet<NodeId> = BTreeSet::new();
    let mut reported_dead: BTreeSet<NodeId> = BTreeSet::new();

    for start in s.surface() {
        let mut path: Vec<NodeId> = Vec::new();
        let mut current = start.id;
        let outcome = loop {
            if let Some(&r) = known.get(&current) {
                break r;
            }
            if let Some(pos) = path.iter().position(|&p| p == current) {
                let cycle = &path[pos..];
                let first = *cycle.iter().min().expect("cycle is non-empty");
                if reported_cycles.insert(first) {
                    let members: Vec<_> = {
                        let mut m = cycle.to_vec();
                        m.sort();
                        m.iter().map(NodeId::to_string).collect()
                    };
                    c.add(Rule::R2, Some(first), format!("cycle through {}", members.join(" ")));
                }
                break Reach::Dead;
            }
            path.push(current);
            let token = s.get(current).expect("heads refer to existing nodes");
            match token.head {
                Head::Root => break Reach::Root,
                Head::Node(h) => current = h,
                Head::Unattached => {
                    if !partial && reported_dead.insert(current) {
                        let what = if current.is_empty_node() { "empty node" } else { "token" };
                        c.add(Rule::R2, Some(current), format!("{} {} is unattached", what, current));
                    }
                    break Reach::Dead;
                }
            }
        };
        for id in path {
            known.insert(id, outcome);
        }
    }
}

fn check_preterm_span(s: &Sentence, c: &mut Collector) {
    let surface: Vec<_> = s.surface().collect();
    let Some(first) = surface.iter().position(|t| t.has_relation("preterm")) else {
        return;
    };
    let under_preterm = |start: NodeId| {
        let mut current = start;
        for _ in 0..=s.tokens.len() {
            let Some(t) = s.get(current) else { return false };
            if t.has_relation("preterm") {
                return true;
            }
            match t.head {
                Head::Node(h) => current = h,
                _ => return false,
            }
        }
        false
    };
    if let Some(stray) = surface[first + 1..].iter().find(|t| !under_preterm(t.id)) {
        c.add(
            Rule::R7,
            Some(surface[first].id),
            format!("preterm material is followed by token {} outside it", stray.id),
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conllu::parse_conllu;

    fn sent(rows: &[(&str, &str, &str, &str)]) -> Sentence {
        let text: String = rows
            .iter()
            .map(|(id, form, head, rel)| format!("{id}\t{form}\t_\tX\t_\t_\t{head}\t{rel}\t_\t_\n"))
            .collect();
        parse_conllu(&text).unwrap().remove(0)
    }

    fn fired(s: &Sentence) -> Vec<Rule> {
        validate_sentence(s, &Tagset::scud(), &RuleSet::all())
            .violations
            .iter()
            .map(|v| v.rule)
            .collect()
    }

    #[test]
    fn table1_is_clean() {
        let s = sent(&[
            ("0.1", "E1.1", "1", "nsubj"),
            ("1", "got", "0", "root"),
            ("2", "two", "3", "nummod"),
            ("3", "dogs", "1", "obj"),
        ]);
        assert!(validate_sentence(&s, &Tagset::scud(), &RuleSet::all()).is_clean());
    }

    #[test]
    fn single_token_is_clean() {
        assert!(fired(&sent(&[("1", "hi", "0", "root")])).is_empty());
    }

    #[test]
    fn mutual_heads_form_a_cycle() {
        let s = sent(&[("1", "a", "2", "dep"), ("2", "b", "1", "dep")]);
        let rules = fired(&s);
        assert!(rules.contains(&Rule::R2));
        // Without a ROOT dependent, R1 fires as well.
        assert!(rules.contains(&Rule::R1));
    }

    #[test]
    fn unknown_relation() {
        let s = sent(&[("1", "hi", "0", "root"), ("2", "there", "1", "foo")]);
        assert_eq!(fired(&s), [Rule::R3]);
    }

    #[test]
    fn rule_checks() {
        let s = sent(&[("1", "the", "2", "flat"), ("2", "the", "0", "root")]);
        assert_eq!(fired(&s), [Rule::R4]);

        let s = sent(&[("1", "dog", "0", "root"), ("2", "x", "1", "dep"), ("3", "s", "1", "goeswith")]);
        assert_eq!(fired(&s), [Rule::R5]);

        let s = sent(&[("1", "my", "0", "root"), ("2", "you", "1", "reparandum")]);
        assert_eq!(fired(&s), [Rule::R6]);
        let report = validate_sentence(&s, &Tagset::scud(), &RuleSet::all().without(Rule::R6));
        assert!(report.is_clean());

        let s = sent(&[("1", "i", "2", "preterm"), ("2", "think", "0", "root")]);
        assert_eq!(fired(&s), [Rule::R7]);

        let s = sent(&[("1", "hi", "0", "root"), ("2", ".", "1", "punct")]);
        assert_eq!(fired(&s), [Rule::R8]);
    }

    #[test]
    fn preterm_span_with_descendants_is_fine() {
        let s = sent(&[
            ("1", "i", "2", "nsubj"),
            ("2", "think", "0", "root"),
            ("3", "that", "4", "mark"),
            ("4", "we", "2", "preterm"),
        ]);
        assert!(fired(&s).is_empty());
        let s = sent(&[
            ("1", "i", "2", "nsubj"),
            ("2", "think", "0", "root"),
            ("3", "we", "2", "preterm"),
            ("4", "so", "2", "discourse"),
        ]);
        assert_eq!(fired(&s), [Rule::R7]);
        let s = sent(&[
            ("1", "i", "2", "nsubj"),
            ("2", "think", "0", "root"),
            ("3", "that", "2", "preterm"),
            ("4", "we", "2", "preterm"),
        ]);
        assert!(fired(&s).is_empty());
    }

    #[test]
    fn unattached_tokens_and_partial_flag() {
        let text = "1\thi\t_\tX\t_\t_\t0\troot\t_\t_\n2\tthere\t_\tX\t_\t_\t_\t_\t_\t_\n";
        let mut s = parse_conllu(text).unwrap().remove(0);
        assert_eq!(fired(&s), [Rule::R2]);
        s.comments.push("# partial = yes".into());
        assert!(fired(&s).is_empty());
    }

    #[test]
    fn corpus_report_is_sorted_and_counted() {
        let a = sent(&[("1", "hi", "0", "root"), ("2", ".", "1", "punct")]);
        let mut b = sent(&[("1", "hi", "0", "root"), ("2", "x", "1", "foo")]);
        b.set_sent_id("a");
        let report = validate_corpus(&[a.clone(), b.clone()], &Tagset::scud(), &RuleSet::all());
        let keys: Vec<_> = report.violations.iter().map(|v| v.sent_id.as_str()).collect();
        assert_eq!(keys, ["#1", "a"]);
        assert_eq!(report.counts[&Rule::R3], 1);
        assert_eq!(report.error_count(), 1);
        assert_eq!(report.warning_count(), 1);
        let text = report.to_text();
        assert!(text.starts_with("#1\t2\tR8\twarning\t"));
        assert!(text.contains("# errors\t1\n"));

        let swapped = validate_corpus(&[a, b], &Tagset::scud(), &RuleSet::all());
        assert_eq!(swapped.to_text(), text);
        assert!(validate_corpus(&[], &Tagset::scud(), &RuleSet::all()).is_clean());
    }
}
