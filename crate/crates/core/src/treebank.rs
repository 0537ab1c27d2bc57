//! In-memory model of dependency-annotated utterances.
//!
//! A [`Sentence`] holds surface tokens and empty nodes in linear order.
//! Empty nodes are placeholders for words that the speech recognizer
//! dropped; unlike enhanced UD they take part in the basic tree through
//! the ordinary HEAD and DEPREL columns.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Position of a node in a sentence.
///
/// Surface tokens have `minor == 0`. Empty node `i.j` sits after surface
/// token `i` (or before the first token when `i == 0`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId {
    pub major: u32,
    pub minor: u32,
}

impl NodeId {
    pub fn surface(major: u32) -> Self {
        NodeId { major, minor: 0 }
    }

    pub fn empty(major: u32, minor: u32) -> Self {
        NodeId { major, minor }
    }

    pub fn is_empty_node(self) -> bool {
        self.minor > 0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.minor == 0 {
            write!(f, "{}", self.major)
        } else {
            write!(f, "{}.{}", self.major, self.minor)
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("invalid node id `{0}`")]
pub struct NodeIdError(pub String);

impl FromStr for NodeId {
    type Err = NodeIdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || NodeIdError(s.to_owned());
        let digits = |p: &str| !p.is_empty() && p.bytes().all(|b| b.is_ascii_digit());
        match s.split_once('.') {
            None if digits(s) => {
                let major: u32 = s.parse().map_err(|_| err())?;
                if major == 0 {
                    return Err(err());
                }
                Ok(NodeId::surface(major))
            }
            Some((a, b)) if digits(a) && digits(b) => {
                let major = a.parse().map_err(|_| err())?;
                let minor: u32 = b.parse().map_err(|_| err())?;
                if minor == 0 {
                    return Err(err());
                }
                Ok(NodeId::empty(major, minor))
            }
            _ => Err(err()),
        }
    }
}

/// Governor of a node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Head {
    Root,
    Node(NodeId),
    Unattached,
}

impl Head {
    pub fn node(self) -> Option<NodeId> {
        match self {
            Head::Node(id) => Some(id),
            _ => None,
        }
    }

    pub fn is_attached(self) -> bool {
        self != Head::Unattached
    }
}

impl fmt::Display for Head {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Head::Root => f.write_str("0"),
            Head::Node(id) => id.fmt(f),
            Head::Unattached => f.write_str("_"),
        }
    }
}

impl FromStr for Head {
    type Err = NodeIdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "_" => Ok(Head::Unattached),
            "0" => Ok(Head::Root),
            _ => s.parse().map(Head::Node),
        }
    }
}

/// Dependency relation label, e.g. `nsubj` or `flat:foreign`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Relation {
    name: String,
    subtype: Option<String>,
}

impl Relation {
    pub fn new(name: impl Into<String>) -> Self {
        Relation {
            name: name.into(),
            subtype: None,
        }
    }

    pub fn with_subtype(name: impl Into<String>, subtype: impl Into<String>) -> Self {
        Relation {
            name: name.into(),
            subtype: Some(subtype.into()),
        }
    }

    /// Primary relation name, without subtype.
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn subtype(&self) -> Option<&str> {
        self.subtype.as_deref()
    }

    pub fn is(&self, name: &str) -> bool {
        self.name == name
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.subtype {
            Some(sub) => write!(f, "{}:{}", self.name, sub),
            None => f.write_str(&self.name),
        }
    }
}

impl From<&str> for Relation {
    fn from(s: &str) -> Self {
        match s.split_once(':') {
            Some((name, sub)) => Relation::with_subtype(name, sub),
            None => Relation::new(s),
        }
    }
}

/// The 17 universal part-of-speech categories.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Upos {
    Adj,
    Adp,
    Adv,
    Aux,
    Cconj,
    Det,
    Intj,
    Noun,
    Num,
    Part,
    Pron,
    Propn,
    Punct,
    Sconj,
    Sym,
    Verb,
    X,
}

impl Upos {
    pub const ALL: [Upos; 17] = [
        Upos::Adj,
        Upos::Adp,
        Upos::Adv,
        Upos::Aux,
        Upos::Cconj,
        Upos::Det,
        Upos::Intj,
        Upos::Noun,
        Upos::Num,
        Upos::Part,
        Upos::Pron,
        Upos::Propn,
        Upos::Punct,
        Upos::Sconj,
        Upos::Sym,
        Upos::Verb,
        Upos::X,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Upos::Adj => "ADJ",
            Upos::Adp => "ADP",
            Upos::Adv => "ADV",
            Upos::Aux => "AUX",
            Upos::Cconj => "CCONJ",
            Upos::Det => "DET",
            Upos::Intj => "INTJ",
            Upos::Noun => "NOUN",
            Upos::Num => "NUM",
            Upos::Part => "PART",
            Upos::Pron => "PRON",
            Upos::Propn => "PROPN",
            Upos::Punct => "PUNCT",
            Upos::Sconj => "SCONJ",
            Upos::Sym => "SYM",
            Upos::Verb => "VERB",
            Upos::X => "X",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Upos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Upos {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Upos::ALL
            .iter()
            .copied()
            .find(|u| u.as_str() == s)
            .ok_or_else(|| s.to_owned())
    }
}

/// One surface token or empty node.
///
/// LEMMA, XPOS, FEATS, DEPS and MISC are kept as raw column strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub id: NodeId,
    pub form: String,
    pub lemma: String,
    pub upos: Option<Upos>,
    pub xpos: String,
    pub feats: String,
    pub head: Head,
    pub deprel: Option<Relation>,
    pub deps: String,
    pub misc: String,
}

impl Token {
    pub fn new(id: NodeId, form: impl Into<String>) -> Self {
        Token {
            id,
            form: form.into(),
            lemma: "_".into(),
            upos: None,
            xpos: "_".into(),
            feats: "_".into(),
            head: Head::Unattached,
            deprel: None,
            deps: "_".into(),
            misc: "_".into(),
        }
    }

    pub fn with_upos(mut self, upos: Upos) -> Self {
        self.upos = Some(upos);
        self
    }

    pub fn attach(mut self, head: Head, deprel: impl Into<Relation>) -> Self {
        self.head = head;
        self.deprel = Some(deprel.into());
        self
    }

    pub fn is_attached(&self) -> bool {
        self.head.is_attached()
    }

    /// Primary relation name, if attached.
    pub fn relation(&self) -> Option<&str> {
        self.deprel.as_ref().map(Relation::name)
    }

    pub fn has_relation(&self, name: &str) -> bool {
        self.relation() == Some(name)
    }
}

impl From<String> for Relation {
    fn from(s: String) -> Self {
        Relation::from(s.as_str())
    }
}

/// A verbatim line kept at a fixed position among the token lines.
///
/// Used for multiword-token ranges (`3-4`) and for comment lines that
/// appear between tokens. `position` is the index of the token the line
/// precedes; `tokens.len()` means after the last token.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Passthrough {
    pub position: usize,
    pub line: String,
}

/// Structural invariant violated by a sentence.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum SentenceError {
    #[error("surface tokens must be numbered 1..n without gaps (found {found}, expected {expected})")]
    NonContiguous { found: NodeId, expected: u32 },
    #[error("node {0} is out of order or duplicated")]
    OutOfOrder(NodeId),
    #[error("empty node {0} follows a missing surface token")]
    DanglingEmpty(NodeId),
    #[error("token {0} has an empty form")]
    EmptyForm(NodeId),
    #[error("token {0} has a tab or newline in a column")]
    BadCharacter(NodeId),
    #[error("token {0} is its own head")]
    SelfHead(NodeId),
    #[error("token {id} has head {head} which does not exist")]
    MissingHead { id: NodeId, head: NodeId },
    #[error("token {0} must have both head and deprel set, or neither")]
    HalfAttached(NodeId),
    #[error("passthrough line position {0} is past the end of the sentence")]
    BadPassthrough(usize),
}

/// One utterance: comment lines, tokens in linear order and passthrough
/// lines.
///
/// `sent_id` and `text` live in the comment lines (`# sent_id = ...`,
/// `# text = ...`) so that they are written back where they were read.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub comments: Vec<String>,
    pub tokens: Vec<Token>,
    pub passthrough: Vec<Passthrough>,
}

impl Sentence {
    pub fn new(tokens: Vec<Token>) -> Self {
        Sentence {
            tokens,
            ..Default::default()
        }
    }

    fn comment_value(&self, key: &str) -> Option<&str> {
        self.comments.iter().find_map(|c| {
            let body = c.strip_prefix('#')?.trim_start();
            let rest = body.strip_prefix(key)?.trim_start();
            Some(rest.strip_prefix('=')?.trim())
        })
    }

    fn set_comment_value(&mut self, key: &str, value: &str) {
        let line = format!("# {} = {}", key, value);
        let pos = self.comments.iter().position(|c| {
            c.strip_prefix('#')
                .map(|b| b.trim_start())
                .and_then(|b| b.strip_prefix(key))
                .map(|r| r.trim_start().starts_with('='))
                .unwrap_or(false)
        });
        match pos {
            Some(i) => self.comments[i] = line,
            None => self.comments.push(line),
        }
    }

    pub fn sent_id(&self) -> Option<&str> {
        self.comment_value("sent_id")
    }

    pub fn set_sent_id(&mut self, id: &str) {
        self.set_comment_value("sent_id", id);
    }

    pub fn text(&self) -> Option<&str> {
        self.comment_value("text")
    }

    pub fn set_text(&mut self, text: &str) {
        self.set_comment_value("text", text);
    }

    /// Work-in-progress annotation, flagged with `# partial = yes`.
    pub fn is_partial(&self) -> bool {
        self.comment_value("partial") == Some("yes")
    }

    /// Surface forms joined by spaces.
    pub fn surface_text(&self) -> String {
        self.surface().map(|t| t.form.as_str()).collect::<Vec<_>>().join(" ")
    }

    pub fn surface(&self) -> impl Iterator<Item = &Token> + '_ {
        self.tokens.iter().filter(|t| !t.id.is_empty_node())
    }

    pub fn empty_nodes(&self) -> impl Iterator<Item = &Token> + '_ {
        self.tokens.iter().filter(|t| t.id.is_empty_node())
    }

    pub fn surface_len(&self) -> usize {
        self.surface().count()
    }

    pub fn index_of(&self, id: NodeId) -> Option<usize> {
        self.tokens.binary_search_by(|t| t.id.cmp(&id)).ok()
    }

    pub fn get(&self, id: NodeId) -> Option<&Token> {
        self.index_of(id).map(|i| &self.tokens[i])
    }

    /// Surface token at 1-based position `major`.
    pub fn surface_token(&self, major: u32) -> Option<&Token> {
        self.get(NodeId::surface(major))
    }

    pub fn dependents(&self, id: NodeId) -> impl Iterator<Item = &Token> + '_ {
        self.tokens.iter().filter(move |t| t.head == Head::Node(id))
    }

    pub fn has_dependents(&self, id: NodeId) -> bool {
        self.dependents(id).next().is_some()
    }

    /// Checks the structural invariants every writable sentence satisfies.
    ///
    /// Acyclicity is not checked here; cyclic graphs are representable so
    /// that the validator can report them.
    pub fn check(&self) -> Result<(), SentenceError> {
        let mut next_major = 1u32;
        let mut prev: Option<NodeId> = None;
        for t in &self.tokens {
            if let Some(p) = prev {
                if t.id <= p {
                    return Err(SentenceError::OutOfOrder(t.id));
                }
            }
            if t.id.is_empty_node() {
                if t.id.major >= next_major {
                    return Err(SentenceError::DanglingEmpty(t.id));
                }
            } else if t.id.major != next_major {
                return Err(SentenceError::NonContiguous {
                    found: t.id,
                    expected: next_major,
                });
            } else {
                next_major += 1;
            }
            prev = Some(t.id);

            if t.form.is_empty() {
                return Err(SentenceError::EmptyForm(t.id));
            }
            let columns = [&t.form, &t.lemma, &t.xpos, &t.feats, &t.deps, &t.misc];
            let bad = |s: &str| s.contains(['\t', '\n', '\r']) || s.is_empty();
            if t.form.contains(['\t', '\n', '\r']) || columns[1..].iter().any(|c| bad(c)) {
                return Err(SentenceError::BadCharacter(t.id));
            }
            if let Some(rel) = &t.deprel {
                if bad(&rel.to_string()) {
                    return Err(SentenceError::BadCharacter(t.id));
                }
            }
            if t.is_attached() != t.deprel.is_some() {
                return Err(SentenceError::HalfAttached(t.id));
            }
        }
        for t in &self.tokens {
            if let Head::Node(h) = t.head {
                if h == t.id {
                    return Err(SentenceError::SelfHead(t.id));
                }
                if self.index_of(h).is_none() {
                    return Err(SentenceError::MissingHead { id: t.id, head: h });
                }
            }
        }
        for p in &self.passthrough {
            if p.position > self.tokens.len() {
                return Err(SentenceError::BadPassthrough(p.position));
            }
        }
        Ok(())
    }

    /// Renumbers empty nodes into the surface sequence.
    ///
    /// Every node gets an integer id following the linear order, so an
    /// empty node `0.1` in front of three tokens becomes token 1 and the
    /// old tokens 1..3 become 2..4. Heads are remapped. Passthrough lines
    /// are dropped because their ranges no longer apply.
    pub fn materialize_empty_nodes(&self) -> Sentence {
        if !self.tokens.iter().any(|t| t.id.is_empty_node()) {
            return self.clone();
        }
        let mut draft = Draft::from_sentence(self);
        for item in &mut draft.items {
            item.empty = false;
        }
        draft.into_sentence()
    }

    /// Multiset of `(head form, dependent form, relation)` triples.
    /// ROOT attachments use `"<root>"` as the head form.
    pub fn edge_multiset(&self) -> Vec<(String, String, String)> {
        let mut edges: Vec<_> = self
            .tokens
            .iter()
            .filter_map(|t| {
                let head = match t.head {
                    Head::Root => "<root>".to_owned(),
                    Head::Node(h) => self.get(h)?.form.clone(),
                    Head::Unattached => return None,
                };
                let rel = t.deprel.as_ref()?.to_string();
                Some((head, t.form.clone(), rel))
            })
            .collect();
        edges.sort();
        edges
    }
}

/// Head reference inside a [`Draft`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum DraftHead {
    Root,
    Key(usize),
    Unattached,
}

#[derive(Clone, Debug)]
pub(crate) struct DraftItem {
    pub key: usize,
    pub empty: bool,
    pub token: Token,
    pub head: DraftHead,
}

/// Editable token sequence whose heads refer to stable keys instead of
/// positions. Converting back assigns fresh ids from the linear order.
#[derive(Clone, Debug)]
pub(crate) struct Draft {
    pub comments: Vec<String>,
    pub items: Vec<DraftItem>,
    next_key: usize,
}

impl Draft {
    pub fn from_sentence(s: &Sentence) -> Draft {
        let keys: HashMap<NodeId, usize> =
            s.tokens.iter().enumerate().map(|(i, t)| (t.id, i)).collect();
        let items = s
            .tokens
            .iter()
            .enumerate()
            .map(|(i, t)| DraftItem {
                key: i,
                empty: t.id.is_empty_node(),
                token: t.clone(),
                head: match t.head {
                    Head::Root => DraftHead::Root,
                    Head::Unattached => DraftHead::Unattached,
                    Head::Node(h) => keys.get(&h).map_or(DraftHead::Unattached, |&k| DraftHead::Key(k)),
                },
            })
            .collect();
        Draft {
            comments: s.comments.clone(),
            items,
            next_key: s.tokens.len(),
        }
    }

    pub fn fresh_key(&mut self) -> usize {
        self.next_key += 1;
        self.next_key - 1
    }

    /// Linear index of the `major`-th surface token (1-based).
    pub fn surface_position(&self, major: u32) -> Option<usize> {
        let mut seen = 0;
        for (i, item) in self.items.iter().enumerate() {
            if !item.empty {
                seen += 1;
                if seen == major {
                    return Some(i);
                }
            }
        }
        None
    }

    pub fn surface_count(&self) -> usize {
        self.items.iter().filter(|i| !i.empty).count()
    }

    pub fn has_dependents(&self, key: usize) -> bool {
        self.items.iter().any(|i| i.head == DraftHead::Key(key))
    }

    pub fn insert(&mut self, at: usize, empty: bool, token: Token, head: DraftHead) -> usize {
        let key = self.fresh_key();
        self.items.insert(
            at,
            DraftItem {
                key,
                empty,
                token,
                head,
            },
        );
        key
    }

    pub fn into_sentence(self) -> Sentence {
        let mut ids = HashMap::with_capacity(self.items.len());
        let mut major = 0u32;
        let mut minor = 0u32;
        for item in &self.items {
            let id = if item.empty {
                minor += 1;
                NodeId::empty(major, minor)
            } else {
                major += 1;
                minor = 0;
                NodeId::surface(major)
            };
            ids.insert(item.key, id);
        }
        let tokens = self
            .items
            .into_iter()
            .map(|item| {
                let mut t = item.token;
                t.id = ids[&item.key];
                t.head = match item.head {
                    DraftHead::Root => Head::Root,
                    DraftHead::Unattached => Head::Unattached,
                    DraftHead::Key(k) => Head::Node(ids[&k]),
                };
                t
            })
            .collect();
        Sentence {
            comments: self.comments,
            tokens,
            passthrough: Vec::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table1() -> Sentence {
        Sentence::new(vec![
            Token::new(NodeId::empty(0, 1), "E1.1")
                .with_upos(Upos::Pron)
                .attach(Head::Node(NodeId::surface(1)), "nsubj"),
            Token::new(NodeId::surface(1), "got").with_upos(Upos::Verb).attach(Head::Root, "root"),
            Token::new(NodeId::surface(2), "two")
                .with_upos(Upos::Num)
                .attach(Head::Node(NodeId::surface(3)), "nummod"),
            Token::new(NodeId::surface(3), "dogs")
                .with_upos(Upos::Noun)
                .attach(Head::Node(NodeId::surface(1)), "obj"),
        ])
    }

    #[test]
    fn node_id_order_is_lexicographic() {
        let mut ids = vec![
            NodeId::surface(2),
            NodeId::empty(1, 2),
            NodeId::surface(1),
            NodeId::empty(0, 1),
            NodeId::empty(1, 1),
        ];
        ids.sort();
        let shown: Vec<_> = ids.iter().map(|i| i.to_string()).collect();
        assert_eq!(shown, ["0.1", "1", "1.1", "1.2", "2"]);
    }

    #[test]
    fn node_id_parsing() {
        assert_eq!("3".parse::<NodeId>().unwrap(), NodeId::surface(3));
        assert_eq!("0.1".parse::<NodeId>().unwrap(), NodeId::empty(0, 1));
        for bad in ["0", "1.0", "a", "1.", ".1", "1-2", "", "-1"] {
            assert!(bad.parse::<NodeId>().is_err(), "{bad}");
        }
    }

    #[test]
    fn relation_subtypes() {
        let r = Relation::from("flat:foreign");
        assert_eq!(r.name(), "flat");
        assert_eq!(r.subtype(), Some("foreign"));
        assert_eq!(r.to_string(), "flat:foreign");
    }

    #[test]
    fn materialize_table1() {
        let m = table1().materialize_empty_nodes();
        let rows: Vec<_> = m
            .tokens
            .iter()
            .map(|t| (t.id.to_string(), t.form.as_str(), t.head.to_string(), t.relation().unwrap()))
            .collect();
        assert_eq!(
            rows,
            [
                ("1".to_owned(), "E1.1", "2".to_owned(), "nsubj"),
                ("2".to_owned(), "got", "0".to_owned(), "root"),
                ("3".to_owned(), "two", "4".to_owned(), "nummod"),
                ("4".to_owned(), "dogs", "2".to_owned(), "obj"),
            ]
        );
        assert_eq!(m.edge_multiset(), table1().edge_multiset());
        m.check().unwrap();
    }

    #[test]
    fn materialize_without_empty_nodes_is_identity() {
        let mut s = table1().materialize_empty_nodes();
        s.passthrough.push(Passthrough {
            position: 0,
            line: "1-2\tgot2\t_\t_\t_\t_\t_\t_\t_\t_".into(),
        });
        assert_eq!(s.materialize_empty_nodes(), s);
    }

    #[test]
    fn check_rejects_broken_sentences() {
        let mut s = table1();
        s.tokens[2].head = Head::Node(NodeId::surface(2));
        assert_eq!(s.check(), Err(SentenceError::SelfHead(NodeId::surface(2))));

        let mut s = table1();
        s.tokens[3].head = Head::Node(NodeId::surface(9));
        assert!(matches!(s.check(), Err(SentenceError::MissingHead { .. })));

        let mut s = table1();
        s.tokens[3].deprel = None;
        assert_eq!(s.check(), Err(SentenceError::HalfAttached(NodeId::surface(3))));

        let mut s = table1();
        s.tokens[3].id = NodeId::surface(4);
        assert!(matches!(s.check(), Err(SentenceError::NonContiguous { .. })));

        let mut s = table1();
        s.tokens[1].form = "g\tot".into();
        assert_eq!(s.check(), Err(SentenceError::BadCharacter(NodeId::surface(1))));

        let mut s = table1();
        s.tokens.swap(0, 1);
        assert!(s.check().is_err());
    }

    #[test]
    fn comment_metadata() {
        let mut s = table1();
        assert_eq!(s.sent_id(), None);
        s.set_sent_id("t1");
        s.set_text("got two dogs");
        s.set_sent_id("t2");
        assert_eq!(s.comments, ["# sent_id = t2", "# text = got two dogs"]);
        assert_eq!(s.sent_id(), Some("t2"));
        assert!(!s.is_partial());
        s.comments.push("# partial = yes".into());
        assert!(s.is_partial());
    }
}
