//! Synthetic speech noise for clean treebanks.
//!
//! Each transformation injects one phenomenon that the annotation scheme
//! can represent and keeps the graph well formed:
//!
//! | transformation            | relation     | inverse                 |
//! |---------------------------|--------------|-------------------------|
//! | [`split_word`]            | `goeswith`   | [`merge_split`]         |
//! | [`drop_token_insert_empty`] | empty node | [`restore_dropped`]     |
//! | [`truncate_preterm`]      | `preterm`    | none, tokens are lost   |
//! | [`add_stutter`]           | `flat`       | [`remove_stutter`]      |
//! | [`add_self_correction`]   | `reparandum` | [`remove_self_correction`] |
//! | [`add_filler`]            | `discourse`  | [`remove_filler`]       |
//!
//! Positions are 1-based surface positions. Structural edits drop
//! multiword-range passthrough lines, and refresh `# text` when present.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::config::{ConfigError, KeyValues};
use crate::treebank::{Draft, DraftHead, Head, NodeId, Relation, Sentence, Token, Upos};

/// Relations a dropped word may carry.
pub const DROPPABLE: [&str; 6] = ["nsubj", "obj", "aux", "cop", "case", "det"];

/// Parts of speech that can be the site of a self-correction.
pub const CONTENT_UPOS: [Upos; 7] = [
    Upos::Noun,
    Upos::Propn,
    Upos::Verb,
    Upos::Adj,
    Upos::Adv,
    Upos::Pron,
    Upos::Num,
];

pub const DEFAULT_FILLERS: [&str; 6] = ["like", "you know", "well", "so", "uh", "um"];

#[derive(Debug, Error)]
pub enum AugmentError {
    #[error("position {index} is out of range 1..={max}")]
    OutOfRange { index: usize, max: usize },
    #[error("split point {point} is out of range for `{form}`")]
    BadSplitPoint { form: String, point: usize },
    #[error("token {0} is too short to split")]
    TooShort(NodeId),
    #[error("token {id} has relation `{relation}`, which cannot be dropped")]
    NotDroppable { id: NodeId, relation: String },
    #[error("token {0} has dependents")]
    HasDependents(NodeId),
    #[error("token {0} is not a content word")]
    NotContent(NodeId),
    #[error("repeat count must be at least 1")]
    ZeroRepeats,
    #[error("sentence has no root")]
    NoRoot,
    #[error("filler must be non-empty words without tabs")]
    BadFiller,
    #[error("token {id} is not the output of this transformation: {reason}")]
    NotInvertible { id: NodeId, reason: &'static str },
    #[error("rate `{name}` = {value} is outside [0, 1]")]
    BadRate { name: &'static str, value: f64 },
    #[error("filler rate is positive but the lexicon is empty")]
    EmptyLexicon,
    #[error(transparent)]
    Config(#[from] ConfigError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct AugmentConfig {
    pub seed: u64,
    pub word_split: f64,
    pub word_drop: f64,
    pub preterm_truncate: f64,
    pub stutter: f64,
    pub self_correct: f64,
    pub filler: f64,
    pub filler_lexicon: Vec<String>,
    pub max_stutter_repeats: usize,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        AugmentConfig {
            seed: 42,
            word_split: 0.05,
            word_drop: 0.05,
            // Share of turns the recognizer cuts short.
            preterm_truncate: 0.05,
            stutter: 0.10,
            self_correct: 0.05,
            filler: 0.10,
            filler_lexicon: DEFAULT_FILLERS.iter().map(|s| s.to_string()).collect(),
            max_stutter_repeats: 2,
        }
    }
}

pub const CONFIG_KEYS: [&str; 10] = [
    "seed",
    "word_split",
    "word_drop",
    "preterm_truncate",
    "stutter",
    "self_correct",
    "filler",
    "lexicon",
    "fillers",
    "max_stutter_repeats",
];

impl AugmentConfig {
    /// Every rate at `rate`, other settings default.
    pub fn uniform(rate: f64, seed: u64) -> Self {
        AugmentConfig {
            seed,
            word_split: rate,
            word_drop: rate,
            preterm_truncate: rate,
            stutter: rate,
            self_correct: rate,
            filler: rate,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), AugmentError> {
        for (name, value) in self.rates() {
            if !(0.0..=1.0).contains(&value) {
                return Err(AugmentError::BadRate { name, value });
            }
        }
        if self.filler > 0.0 && self.filler_lexicon.is_empty() {
            return Err(AugmentError::EmptyLexicon);
        }
        Ok(())
    }

    fn rates(&self) -> [(&'static str, f64); 6] {
        [
            ("word_split", self.word_split),
            ("word_drop", self.word_drop),
            ("preterm_truncate", self.preterm_truncate),
            ("stutter", self.stutter),
            ("self_correct", self.self_correct),
            ("filler", self.filler),
        ]
    }

    /// Overrides defaults from `key = value` settings. `lexicon` names a
    /// file with one filler per line, resolved against `base`; `fillers`
    /// is an inline comma-separated list.
    pub fn apply(&mut self, kv: &KeyValues, base: Option<&Path>) -> Result<(), AugmentError> {
        kv.ensure_known(&CONFIG_KEYS)?;
        if let Some(seed) = kv.parsed("seed")? {
            self.seed = seed;
        }
        let fields: [(&str, &mut f64); 6] = [
            ("word_split", &mut self.word_split),
            ("word_drop", &mut self.word_drop),
            ("preterm_truncate", &mut self.preterm_truncate),
            ("stutter", &mut self.stutter),
            ("self_correct", &mut self.self_correct),
            ("filler", &mut self.filler),
        ];
        for (key, field) in fields {
            if let Some(v) = kv.parsed(key)? {
                *field = v;
            }
        }
        if let Some(n) = kv.parsed("max_stutter_repeats")? {
            self.max_stutter_repeats = n;
        }
        if let Some(list) = kv.get("fillers") {
            self.filler_lexicon = list
                .split(',')
                .map(|w| w.trim().to_owned())
                .filter(|w| !w.is_empty())
                .collect();
        }
        if let Some(path) = kv.get("lexicon") {
            let path = match base {
                Some(b) => b.join(path),
                None => Path::new(path).to_path_buf(),
            };
            let text = std::fs::read_to_string(&path).map_err(|source| ConfigError::Io {
                path: path.display().to_string(),
                source,
            })?;
            self.filler_lexicon = text
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_owned)
                .collect();
        }
        self.validate()
    }
}

fn finish(draft: Draft, original: &Sentence) -> Sentence {
    let mut out = draft.into_sentence();
    if original.text().is_some() {
        let text = out.surface_text();
        out.set_text(&text);
    }
    out
}

fn surface_index(draft: &Draft, idx: usize) -> Result<usize, AugmentError> {
    let max = draft.surface_count();
    if idx == 0 || idx > max {
        return Err(AugmentError::OutOfRange { index: idx, max });
    }
    Ok(draft.surface_position(idx as u32).expect("in range"))
}

fn copy_token(t: &Token, form: &str) -> Token {
    let mut c = Token::new(t.id, form);
    c.lemma = t.lemma.clone();
    c.upos = t.upos;
    c.xpos = t.xpos.clone();
    c.feats = t.feats.clone();
    c
}

/// Splits the word at `idx` after `split_point` characters, as a
/// recognizer that broke one word in two. The second piece attaches to the
/// first with `goeswith` and gets POS `X`.
pub fn split_word(s: &Sentence, idx: usize, split_point: usize) -> Result<Sentence, AugmentError> {
    let mut draft = Draft::from_sentence(s);
    let pos = surface_index(&draft, idx)?;
    let item = &draft.items[pos];
    let chars: Vec<char> = item.token.form.chars().collect();
    if chars.len() < 2 {
        return Err(AugmentError::TooShort(item.token.id));
    }
    if split_point == 0 || split_point >= chars.len() {
        return Err(AugmentError::BadSplitPoint {
            form: item.token.form.clone(),
            point: split_point,
        });
    }
    let first: String = chars[..split_point].iter().collect();
    let second: String = chars[split_point..].iter().collect();
    let key = item.key;
    draft.items[pos].token.form = first;
    let piece = Token::new(NodeId::surface(0), second).with_upos(Upos::X);
    draft.insert(pos + 1, false, piece, DraftHead::Key(key));
    draft.items[pos + 1].token.deprel = Some(Relation::new("goeswith"));
    Ok(finish(draft, s))
}

/// Inverse of [`split_word`]: joins token `idx + 1` back onto `idx`.
pub fn merge_split(s: &Sentence, idx: usize) -> Result<Sentence, AugmentError> {
    let mut draft = Draft::from_sentence(s);
    let pos = surface_index(&draft, idx)?;
    let next = surface_index(&draft, idx + 1)?;
    let head_key = draft.items[pos].key;
    let piece = &draft.items[next];
    if piece.head != DraftHead::Key(head_key) || !piece.token.has_relation("goeswith") {
        return Err(AugmentError::NotInvertible {
            id: piece.token.id,
            reason: "not a goeswith piece of the previous token",
        });
    }
    if draft.has_dependents(piece.key) {
        return Err(AugmentError::HasDependents(piece.token.id));
    }
    let tail = draft.items.remove(next).token.form;
    draft.items[pos].token.form.push_str(&tail);
    Ok(finish(draft, s))
}

/// Replaces the word at `idx` with an empty node in the same place, as a
/// recognizer that dropped it. The node keeps POS, head and relation and
/// is named `E<slot>.<n>`, where `<slot>` is the 1-based position the
/// word occupied.
pub fn drop_token_insert_empty(s: &Sentence, idx: usize) -> Result<Sentence, AugmentError> {
    let mut draft = Draft::from_sentence(s);
    let pos = surface_index(&draft, idx)?;
    let item = &draft.items[pos];
    let relation = item.token.relation().unwrap_or("_");
    if !DROPPABLE.contains(&relation) {
        return Err(AugmentError::NotDroppable {
            id: item.token.id,
            relation: relation.to_owned(),
        });
    }
    if draft.has_dependents(item.key) {
        return Err(AugmentError::HasDependents(item.token.id));
    }
    draft.items[pos].empty = true;
    let mut out = finish(draft, s);
    let id = out.tokens[pos].id;
    out.tokens[pos].form = format!("E{}.{}", id.major + 1, id.minor);
    if s.text().is_some() {
        let text = out.surface_text();
        out.set_text(&text);
    }
    Ok(out)
}

/// Inverse of [`drop_token_insert_empty`]: turns empty node `id` back into
/// the surface word `form`.
pub fn restore_dropped(s: &Sentence, id: NodeId, form: &str) -> Result<Sentence, AugmentError> {
    let pos = s.index_of(id).filter(|_| id.is_empty_node()).ok_or(AugmentError::NotInvertible {
        id,
        reason: "no such empty node",
    })?;
    let mut draft = Draft::from_sentence(s);
    draft.items[pos].empty = false;
    draft.items[pos].token.form = form.to_owned();
    Ok(finish(draft, s))
}

/// Cuts the utterance after surface position `cut`, as a recognizer that
/// ended the turn early.
///
/// Survivors whose head was cut away are reattached. If the root survives
/// they attach to it as `preterm`; otherwise the leftmost such token
/// becomes the root and the others attach to it as `preterm`.
pub fn truncate_preterm(s: &Sentence, cut: usize) -> Result<Sentence, AugmentError> {
    let mut draft = Draft::from_sentence(s);
    let n = draft.surface_count();
    if cut == 0 || cut >= n {
        return Err(AugmentError::OutOfRange {
            index: cut,
            max: n.saturating_sub(1),
        });
    }
    let last = draft.surface_position(cut as u32).expect("in range");
    let removed: Vec<usize> = draft.items.drain(last + 1..).map(|i| i.key).collect();
    let orphaned = |h: DraftHead| matches!(h, DraftHead::Key(k) if removed.contains(&k));

    let root = draft.items.iter().find(|i| i.head == DraftHead::Root).map(|i| i.key);
    let orphans: Vec<usize> = draft
        .items
        .iter()
        .enumerate()
        .filter(|(_, i)| orphaned(i.head))
        .map(|(p, _)| p)
        .collect();
    let anchor = match root {
        Some(k) => k,
        None => {
            let Some(&first) = orphans
                .iter()
                .find(|&&p| !draft.items[p].empty)
                .or(orphans.first())
            else {
                return Ok(finish(draft, s));
            };
            let item = &mut draft.items[first];
            item.head = DraftHead::Root;
            item.token.deprel = Some(Relation::new("root"));
            item.key
        }
    };
    for p in orphans {
        let item = &mut draft.items[p];
        if item.key != anchor {
            item.head = DraftHead::Key(anchor);
            item.token.deprel = Some(Relation::new("preterm"));
        }
    }
    Ok(finish(draft, s))
}

/// Inserts `repeats` copies of the word at `idx` right after it, each
/// attached to the original with `flat`.
pub fn add_stutter(s: &Sentence, idx: usize, repeats: usize) -> Result<Sentence, AugmentError> {
    if repeats == 0 {
        return Err(AugmentError::ZeroRepeats);
    }
    let mut draft = Draft::from_sentence(s);
    let pos = surface_index(&draft, idx)?;
    let key = draft.items[pos].key;
    let copy = copy_token(&draft.items[pos].token, &draft.items[pos].token.form);
    for k in 0..repeats {
        let mut t = copy.clone();
        t.deprel = Some(Relation::new("flat"));
        draft.insert(pos + 1 + k, false, t, DraftHead::Key(key));
    }
    Ok(finish(draft, s))
}

/// Inverse of [`add_stutter`]: removes the run of identical `flat` copies
/// directly after `idx`.
pub fn remove_stutter(s: &Sentence, idx: usize) -> Result<Sentence, AugmentError> {
    let mut draft = Draft::from_sentence(s);
    let pos = surface_index(&draft, idx)?;
    let key = draft.items[pos].key;
    let form = draft.items[pos].token.form.clone();
    let mut end = pos + 1;
    while let Some(item) = draft.items.get(end) {
        let copy = !item.empty
            && item.head == DraftHead::Key(key)
            && item.token.has_relation("flat")
            && item.token.form == form
            && !draft.has_dependents(item.key);
        if !copy {
            break;
        }
        end += 1;
    }
    if end == pos + 1 {
        return Err(AugmentError::NotInvertible {
            id: draft.items[pos].token.id,
            reason: "no stutter copies follow",
        });
    }
    draft.items.drain(pos + 1..end);
    Ok(finish(draft, s))
}

/// What the speaker said before correcting themselves.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Disfluency {
    /// The repaired word itself, restarted.
    Repeat,
    /// A different word, later replaced.
    Word(String),
}

/// Inserts a disfluent word right before the content word at `idx`; it
/// attaches to that word with `reparandum`.
pub fn add_self_correction(s: &Sentence, idx: usize, source: &Disfluency) -> Result<Sentence, AugmentError> {
    let mut draft = Draft::from_sentence(s);
    let pos = surface_index(&draft, idx)?;
    let repair = &draft.items[pos];
    if !repair.token.upos.is_some_and(|u| CONTENT_UPOS.contains(&u)) {
        return Err(AugmentError::NotContent(repair.token.id));
    }
    let form = match source {
        Disfluency::Repeat => repair.token.form.clone(),
        Disfluency::Word(w) => {
            if w.is_empty() || w.contains(['\t', '\n', '\r']) {
                return Err(AugmentError::BadFiller);
            }
            w.clone()
        }
    };
    let mut t = copy_token(&repair.token, &form);
    if matches!(source, Disfluency::Word(_)) {
        t.lemma = "_".into();
        t.feats = "_".into();
    }
    t.deprel = Some(Relation::new("reparandum"));
    let key = repair.key;
    draft.insert(pos, false, t, DraftHead::Key(key));
    Ok(finish(draft, s))
}

/// Inverse of [`add_self_correction`]: removes the reparandum at `idx`.
pub fn remove_self_correction(s: &Sentence, idx: usize) -> Result<Sentence, AugmentError> {
    let mut draft = Draft::from_sentence(s);
    let pos = surface_index(&draft, idx)?;
    let item = &draft.items[pos];
    if !item.token.has_relation("reparandum") {
        return Err(AugmentError::NotInvertible {
            id: item.token.id,
            reason: "not a reparandum",
        });
    }
    if draft.has_dependents(item.key) {
        return Err(AugmentError::HasDependents(item.token.id));
    }
    draft.items.remove(pos);
    Ok(finish(draft, s))
}

/// Inserts a discourse filler so that it becomes surface token
/// `position` (1..=n+1). Its first word attaches to the root with
/// `discourse`, further words attach to the first with `fixed`. POS is
/// INTJ, except ADV for a lone `like`.
pub fn add_filler(s: &Sentence, position: usize, word: &str) -> Result<Sentence, AugmentError> {
    let words: Vec<&str> = word.split_whitespace().collect();
    if words.is_empty() || word.contains('\t') {
        return Err(AugmentError::BadFiller);
    }
    let mut draft = Draft::from_sentence(s);
    let n = draft.surface_count();
    if position == 0 || position > n + 1 {
        return Err(AugmentError::OutOfRange {
            index: position,
            max: n + 1,
        });
    }
    let root = draft
        .items
        .iter()
        .find(|i| i.head == DraftHead::Root)
        .map(|i| i.key)
        .ok_or(AugmentError::NoRoot)?;
    let at = match position {
        1 => 0,
        p => draft.surface_position(p as u32 - 1).expect("in range") + 1,
    };
    let upos = if words == ["like"] { Upos::Adv } else { Upos::Intj };
    let first = Token::new(NodeId::surface(0), words[0])
        .with_upos(upos)
        .attach(Head::Root, "discourse");
    let first_key = draft.insert(at, false, first, DraftHead::Key(root));
    for (k, w) in words.iter().enumerate().skip(1) {
        let t = Token::new(NodeId::surface(0), *w)
            .with_upos(Upos::Intj)
            .attach(Head::Root, "fixed");
        draft.insert(at + k, false, t, DraftHead::Key(first_key));
    }
    Ok(finish(draft, s))
}

/// Inverse of [`add_filler`]: removes the filler starting at `position`
/// together with its `fixed` continuation.
pub fn remove_filler(s: &Sentence, position: usize) -> Result<Sentence, AugmentError> {
    let mut draft = Draft::from_sentence(s);
    let pos = surface_index(&draft, position)?;
    let item = &draft.items[pos];
    let root = draft.items.iter().find(|i| i.head == DraftHead::Root).map(|i| i.key);
    if !item.token.has_relation("discourse") || root.map(DraftHead::Key) != Some(item.head) {
        return Err(AugmentError::NotInvertible {
            id: item.token.id,
            reason: "not a discourse filler on the root",
        });
    }
    let key = item.key;
    let mut end = pos + 1;
    while draft
        .items
        .get(end)
        .is_some_and(|i| i.head == DraftHead::Key(key) && i.token.has_relation("fixed"))
    {
        end += 1;
    }
    if draft.items[pos + 1..end].iter().any(|i| draft.has_dependents(i.key))
        || draft.items.iter().filter(|i| i.head == DraftHead::Key(key)).count() != end - pos - 1
    {
        return Err(AugmentError::HasDependents(draft.items[pos].token.id));
    }
    draft.items.drain(pos..end);
    Ok(finish(draft, s))
}

/// Random source for sentence `index`: one ChaCha stream per sentence,
/// so results do not depend on processing order.
pub fn sentence_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn pick<T: Copy>(rng: &mut ChaCha8Rng, items: &[T]) -> Option<T> {
    if items.is_empty() {
        None
    } else {
        Some(items[rng.random_range(0..items.len())])
    }
}

fn in_goeswith_pair(s: &Sentence, major: usize) -> bool {
    let id = NodeId::surface(major as u32);
    let t = s.get(id);
    t.is_some_and(|t| t.has_relation("goeswith"))
        || s.dependents(id).any(|d| d.has_relation("goeswith"))
}

/// Applies each transformation once with its configured probability.
/// Order: filler, stutter, self-correction, truncation, split, drop.
pub fn augment_sentence(s: &Sentence, config: &AugmentConfig, rng: &mut ChaCha8Rng) -> Sentence {
    let mut s = s.clone();

    if rng.random::<f64>() < config.filler && !config.filler_lexicon.is_empty() {
        let n = s.surface_len();
        // Never between the two pieces of a split word.
        let positions: Vec<usize> = (1..=n + 1)
            .filter(|&p| !s.surface_token(p as u32).is_some_and(|t| t.has_relation("goeswith")))
            .collect();
        let word = &config.filler_lexicon[rng.random_range(0..config.filler_lexicon.len())];
        if let Some(p) = pick(rng, &positions) {
            if let Ok(out) = add_filler(&s, p, word) {
                s = out;
            }
        }
    }

    if rng.random::<f64>() < config.stutter {
        let candidates: Vec<usize> = (1..=s.surface_len()).filter(|&p| !in_goeswith_pair(&s, p)).collect();
        let repeats = rng.random_range(1..=config.max_stutter_repeats.max(1));
        if let Some(p) = pick(rng, &candidates) {
            s = add_stutter(&s, p, repeats).expect("candidate is valid");
        }
    }

    if rng.random::<f64>() < config.self_correct {
        let tokens: Vec<&Token> = s.surface().collect();
        let candidates: Vec<usize> = tokens
            .iter()
            .enumerate()
            .filter(|(_, t)| t.upos.is_some_and(|u| CONTENT_UPOS.contains(&u)))
            .map(|(i, _)| i + 1)
            .collect();
        let other = rng.random_range(0..tokens.len().max(1));
        if let Some(p) = pick(rng, &candidates) {
            let source = if tokens.len() > 1 && other + 1 != p {
                Disfluency::Word(tokens[other].form.clone())
            } else {
                Disfluency::Repeat
            };
            s = add_self_correction(&s, p, &source).expect("candidate is valid");
        }
    }

    if rng.random::<f64>() < config.preterm_truncate {
        let n = s.surface_len();
        if n >= 2 {
            let cut = rng.random_range(1..n);
            s = truncate_preterm(&s, cut).expect("cut is in range");
        }
    }

    if rng.random::<f64>() < config.word_split {
        let candidates: Vec<usize> = s
            .surface()
            .enumerate()
            .filter(|(_, t)| t.form.chars().count() >= 2 && t.upos != Some(Upos::Punct))
            .map(|(i, _)| i + 1)
            .collect();
        if let Some(p) = pick(rng, &candidates) {
            let len = s.surface_token(p as u32).expect("exists").form.chars().count();
            let point = rng.random_range(1..len);
            s = split_word(&s, p, point).expect("candidate is valid");
        }
    }

    if rng.random::<f64>() < config.word_drop {
        let candidates: Vec<usize> = s
            .surface()
            .enumerate()
            .filter(|(_, t)| t.relation().is_some_and(|r| DROPPABLE.contains(&r)) && !s.has_dependents(t.id))
            .map(|(i, _)| i + 1)
            .collect();
        if s.surface_len() > 1 {
            if let Some(p) = pick(rng, &candidates) {
                s = drop_token_insert_empty(&s, p).expect("candidate is valid");
            }
        }
    }

    s
}

/// Augments every sentence independently; the output depends only on the
/// corpus and the configuration.
pub fn augment_corpus(corpus: &[Sentence], config: &AugmentConfig) -> Result<Vec<Sentence>, AugmentError> {
    config.validate()?;
    Ok(corpus
        .iter()
        .enumerate()
        .map(|(i, s)| augment_sentence(s, config, &mut sentence_rng(config.seed, i)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conllu::parse_conllu;
    use crate::tagset::Tagset;
    use crate::validate::{validate_sentence, Rule, RuleSet};

    fn parse_one(rows: &[(&str, &str, &str, &str)]) -> Sentence {
        let text: String = rows
            .iter()
            .enumerate()
            .map(|(i, (form, upos, head, rel))| format!("{}\t{form}\t_\t{upos}\t_\t_\t{head}\t{rel}\t_\t_\n", i + 1))
            .collect();
        parse_conllu(&text).unwrap().remove(0)
    }

    fn i_got_two_dogs() -> Sentence {
        parse_one(&[
            ("I", "PRON", "2", "nsubj"),
            ("got", "VERB", "0", "root"),
            ("two", "NUM", "4", "nummod"),
            ("dogs", "NOUN", "2", "obj"),
        ])
    }

    fn errors(s: &Sentence) -> Vec<Rule> {
        validate_sentence(s, &Tagset::scud(), &RuleSet::all())
            .errors()
            .map(|v| v.rule)
            .collect()
    }

    fn forms(s: &Sentence) -> Vec<&str> {
        s.tokens.iter().map(|t| t.form.as_str()).collect()
    }

    #[test]
    fn split_dogs() {
        let s = split_word(&i_got_two_dogs(), 4, 3).unwrap();
        assert_eq!(forms(&s), ["I", "got", "two", "dog", "s"]);
        let piece = &s.tokens[4];
        assert_eq!(piece.head, Head::Node(NodeId::surface(4)));
        assert_eq!(piece.relation(), Some("goeswith"));
        assert_eq!(piece.upos, Some(Upos::X));
        assert_eq!(s.tokens[2].head, Head::Node(NodeId::surface(4)));
        assert!(validate_sentence(&s, &Tagset::scud(), &RuleSet::all()).is_clean());
        assert_eq!(merge_split(&s, 4).unwrap(), i_got_two_dogs());
    }

    #[test]
    fn split_errors() {
        let s = i_got_two_dogs();
        assert!(matches!(split_word(&s, 1, 1), Err(AugmentError::TooShort(id)) if id == NodeId::surface(1)));
        assert!(matches!(split_word(&s, 4, 4), Err(AugmentError::BadSplitPoint { .. })));
        assert!(matches!(split_word(&s, 5, 1), Err(AugmentError::OutOfRange { .. })));
        assert!(matches!(split_word(&s, 0, 1), Err(AugmentError::OutOfRange { .. })));
    }

    #[test]
    fn drop_reproduces_table1() {
        let s = drop_token_insert_empty(&i_got_two_dogs(), 1).unwrap();
        assert_eq!(s.tokens[0].id, NodeId::empty(0, 1));
        assert_eq!(s.tokens[0].form, "E1.1");
        let m = s.materialize_empty_nodes();
        let rows: Vec<_> = m
            .tokens
            .iter()
            .map(|t| (t.form.as_str(), t.head.to_string(), t.relation().unwrap()))
            .collect();
        assert_eq!(
            rows,
            [
                ("E1.1", "2".to_owned(), "nsubj"),
                ("got", "0".to_owned(), "root"),
                ("two", "4".to_owned(), "nummod"),
                ("dogs", "2".to_owned(), "obj"),
            ]
        );
        assert!(errors(&s).is_empty());
        assert_eq!(restore_dropped(&s, NodeId::empty(0, 1), "I").unwrap(), i_got_two_dogs());
    }

    #[test]
    fn drop_refuses_heads_and_content_relations() {
        let s = i_got_two_dogs();
        assert!(matches!(drop_token_insert_empty(&s, 3), Err(AugmentError::NotDroppable { .. })));
        let s = parse_one(&[("the", "DET", "2", "det"), ("dog", "NOUN", "3", "nsubj"), ("ran", "VERB", "0", "root")]);
        assert!(matches!(
            drop_token_insert_empty(&s, 2),
            Err(AugmentError::HasDependents(id)) if id == NodeId::surface(2)
        ));
    }

    #[test]
    fn truncation_reattaches_orphans() {
        // i think that we go
        let s = parse_one(&[
            ("i", "PRON", "2", "nsubj"),
            ("think", "VERB", "0", "root"),
            ("that", "SCONJ", "5", "mark"),
            ("we", "PRON", "5", "nsubj"),
            ("go", "VERB", "2", "ccomp"),
        ]);
        let t = truncate_preterm(&s, 4).unwrap();
        assert_eq!(forms(&t), ["i", "think", "that", "we"]);
        assert_eq!(t.tokens[2].relation(), Some("preterm"));
        assert_eq!(t.tokens[3].relation(), Some("preterm"));
        assert_eq!(t.tokens[3].head, Head::Node(NodeId::surface(2)));
        assert!(validate_sentence(&t, &Tagset::scud(), &RuleSet::all()).is_clean());

        // Root cut away: leftmost orphan becomes the root.
        let t = truncate_preterm(&s, 1).unwrap();
        assert_eq!(t.tokens[0].head, Head::Root);
        assert_eq!(t.tokens[0].relation(), Some("root"));

        let t = truncate_preterm(&i_got_two_dogs(), 2).unwrap();
        assert!(t.tokens.iter().all(|t| !t.has_relation("preterm")));

        assert!(truncate_preterm(&s, 5).is_err());
        assert!(truncate_preterm(&s, 0).is_err());
    }

    #[test]
    fn stutter_round_trip() {
        let s = parse_one(&[("the", "DET", "2", "det"), ("dog", "NOUN", "0", "root")]);
        let st = add_stutter(&s, 1, 1).unwrap();
        assert_eq!(forms(&st), ["the", "the", "dog"]);
        assert_eq!(st.tokens[1].head, Head::Node(NodeId::surface(1)));
        assert_eq!(st.tokens[1].relation(), Some("flat"));
        assert!(errors(&st).is_empty());
        assert_eq!(remove_stutter(&st, 1).unwrap(), s);
        assert!(matches!(add_stutter(&s, 1, 0), Err(AugmentError::ZeroRepeats)));
        assert!(remove_stutter(&s, 1).is_err());
    }

    #[test]
    fn self_correction_you_my_name() {
        let s = parse_one(&[("my", "PRON", "2", "nmod:poss"), ("name", "NOUN", "0", "root")]);
        let c = add_self_correction(&s, 1, &Disfluency::Word("you".into())).unwrap();
        assert_eq!(forms(&c), ["you", "my", "name"]);
        assert_eq!(c.tokens[0].relation(), Some("reparandum"));
        assert_eq!(c.tokens[0].head, Head::Node(NodeId::surface(2)));
        assert!(validate_sentence(&c, &Tagset::scud(), &RuleSet::all()).is_clean());
        assert_eq!(remove_self_correction(&c, 1).unwrap(), s);
        let s2 = parse_one(&[("the", "DET", "2", "det"), ("dog", "NOUN", "0", "root")]);
        assert!(matches!(
            add_self_correction(&s2, 1, &Disfluency::Repeat),
            Err(AugmentError::NotContent(id)) if id == NodeId::surface(1)
        ));
    }

    #[test]
    fn filler_like() {
        let s = parse_one(&[
            ("I", "PRON", "2", "nsubj"),
            ("have", "VERB", "0", "root"),
            ("three", "NUM", "4", "nummod"),
            ("dogs", "NOUN", "2", "obj"),
        ]);
        let f = add_filler(&s, 3, "like").unwrap();
        assert_eq!(forms(&f), ["I", "have", "like", "three", "dogs"]);
        assert_eq!(f.tokens[2].upos, Some(Upos::Adv));
        assert_eq!(f.tokens[2].head, Head::Node(NodeId::surface(2)));
        assert_eq!(f.tokens[2].relation(), Some("discourse"));
        assert!(validate_sentence(&f, &Tagset::scud(), &RuleSet::all()).is_clean());
        assert_eq!(remove_filler(&f, 3).unwrap(), s);

        for word in ["so", "and"] {
            let f = add_filler(&s, 1, word).unwrap();
            assert_eq!(f.tokens[0].form, word);
            assert_eq!(f.tokens[0].upos, Some(Upos::Intj));
            assert!(validate_sentence(&f, &Tagset::scud(), &RuleSet::all()).is_clean());
        }

        let f = add_filler(&s, 5, "you know").unwrap();
        assert_eq!(forms(&f), ["I", "have", "three", "dogs", "you", "know"]);
        assert_eq!(f.tokens[5].relation(), Some("fixed"));
        assert_eq!(remove_filler(&f, 5).unwrap(), s);
        assert!(add_filler(&s, 6, "um").is_err());
    }

    #[test]
    fn text_comment_follows_edits() {
        let mut s = i_got_two_dogs();
        s.set_text("I got two dogs");
        let f = add_filler(&s, 1, "um").unwrap();
        assert_eq!(f.text(), Some("um I got two dogs"));
        let d = drop_token_insert_empty(&s, 1).unwrap();
        assert_eq!(d.text(), Some("got two dogs"));
    }

    #[test]
    fn zero_rates_are_identity() {
        let corpus = vec![i_got_two_dogs(); 5];
        let config = AugmentConfig::uniform(0.0, 1);
        assert_eq!(augment_corpus(&corpus, &config).unwrap(), corpus);
    }

    #[test]
    fn certain_split_always_applies() {
        let corpus = vec![i_got_two_dogs(); 20];
        let config = AugmentConfig {
            word_split: 1.0,
            ..AugmentConfig::uniform(0.0, 9)
        };
        let out = augment_corpus(&corpus, &config).unwrap();
        for s in &out {
            assert!(s.tokens.iter().any(|t| t.has_relation("goeswith")));
        }
    }

    #[test]
    fn config_from_key_values() {
        let kv = KeyValues::parse("seed = 3\nfiller = 0.5\nfillers = uh, um\n").unwrap();
        let mut c = AugmentConfig::default();
        c.apply(&kv, None).unwrap();
        assert_eq!(c.seed, 3);
        assert_eq!(c.filler, 0.5);
        assert_eq!(c.filler_lexicon, ["uh", "um"]);
        let kv = KeyValues::parse("stutter = 1.5\n").unwrap();
        assert!(matches!(
            AugmentConfig::default().apply(&kv, None),
            Err(AugmentError::BadRate { name: "stutter", .. })
        ));
        let kv = KeyValues::parse("bogus = 1\n").unwrap();
        assert!(AugmentConfig::default().apply(&kv, None).is_err());
    }
}
