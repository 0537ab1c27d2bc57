//! Toy grammar of written-style English with gold dependency trees.
//!
//! Produces clean, projective sentences (no disfluencies, no punctuation)
//! for training and testing when no real treebank is at hand.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::augment::sentence_rng;
use crate::treebank::{Head, NodeId, Sentence, Token, Upos};

const SUBJECT_PRONOUNS: [&str; 6] = ["i", "you", "we", "they", "he", "she"];
const OBJECT_PRONOUNS: [&str; 7] = ["me", "you", "us", "them", "him", "her", "it"];
const POSSESSIVES: [&str; 5] = ["my", "your", "our", "his", "her"];
const NUMBERS: [&str; 5] = ["two", "three", "four", "five", "ten"];
const PROPER: [&str; 8] = ["john", "mary", "boston", "paris", "sarah", "mike", "chicago", "anna"];
const ADJECTIVES: [&str; 12] = [
    "big", "small", "new", "old", "good", "nice", "red", "cheap", "busy", "happy", "long", "early",
];
const NOUNS: [(&str, &str); 20] = [
    ("dog", "dogs"),
    ("car", "cars"),
    ("house", "houses"),
    ("book", "books"),
    ("friend", "friends"),
    ("teacher", "teachers"),
    ("phone", "phones"),
    ("ticket", "tickets"),
    ("movie", "movies"),
    ("apple", "apples"),
    ("game", "games"),
    ("job", "jobs"),
    ("room", "rooms"),
    ("city", "cities"),
    ("school", "schools"),
    ("store", "stores"),
    ("doctor", "doctors"),
    ("sister", "sisters"),
    ("flight", "flights"),
    ("kid", "kids"),
];
const MODIFIER_NOUNS: [&str; 5] = ["bus", "phone", "train", "credit", "school"];
const TRANSITIVE: [(&str, &str); 14] = [
    ("see", "saw"),
    ("get", "got"),
    ("buy", "bought"),
    ("like", "liked"),
    ("need", "needed"),
    ("make", "made"),
    ("find", "found"),
    ("call", "called"),
    ("take", "took"),
    ("eat", "ate"),
    ("book", "booked"),
    ("watch", "watched"),
    ("sell", "sold"),
    ("visit", "visited"),
];
const INTRANSITIVE: [(&str, &str); 7] = [
    ("go", "went"),
    ("run", "ran"),
    ("sleep", "slept"),
    ("work", "worked"),
    ("leave", "left"),
    ("arrive", "arrived"),
    ("stay", "stayed"),
];
const SAY: [(&str, &str); 4] = [("think", "thought"), ("know", "knew"), ("say", "said"), ("hope", "hoped")];
const WANT: [(&str, &str); 3] = [("want", "wanted"), ("need", "needed"), ("try", "tried")];
const AUX: [&str; 5] = ["will", "can", "did", "should", "could"];
const COPULA: [&str; 2] = ["is", "was"];
const PREPOSITIONS: [&str; 6] = ["to", "in", "with", "at", "from", "for"];
const ADVERBS: [&str; 6] = ["now", "today", "again", "there", "here", "later"];
const INTENSIFIERS: [&str; 3] = ["really", "very", "so"];
const WH_AUX: [&str; 3] = ["did", "do", "will"];

struct Word {
    form: &'static str,
    upos: Upos,
    head: usize,
    rel: &'static str,
}

#[derive(Default)]
struct Builder {
    words: Vec<Word>,
}

impl Builder {
    /// Appends a word and returns its 1-based position.
    fn push(&mut self, form: &'static str, upos: Upos) -> usize {
        self.words.push(Word {
            form,
            upos,
            head: 0,
            rel: "",
        });
        self.words.len()
    }

    fn attach(&mut self, dep: usize, head: usize, rel: &'static str) {
        let w = &mut self.words[dep - 1];
        w.head = head;
        w.rel = rel;
    }

    fn into_sentence(self) -> Sentence {
        let tokens = self
            .words
            .into_iter()
            .enumerate()
            .map(|(i, w)| {
                let head = if w.head == 0 { Head::Root } else { Head::Node(NodeId::surface(w.head as u32)) };
                let mut t = Token::new(NodeId::surface(i as u32 + 1), w.form)
                    .with_upos(w.upos)
                    .attach(head, w.rel);
                t.lemma = w.form.to_owned();
                t
            })
            .collect();
        Sentence::new(tokens)
    }
}

fn one<T: Copy>(rng: &mut ChaCha8Rng, items: &[T]) -> T {
    items[rng.random_range(0..items.len())]
}

fn chance(rng: &mut ChaCha8Rng, p: f64) -> bool {
    rng.random::<f64>() < p
}

/// Noun phrase; returns the head noun.
fn noun_phrase(b: &mut Builder, rng: &mut ChaCha8Rng, nested: bool) -> usize {
    if chance(rng, 0.12) {
        return b.push(one(rng, &PROPER), Upos::Propn);
    }
    let mut deps = Vec::new();
    let plural = match rng.random_range(0..6) {
        0 => {
            deps.push((b.push(one(rng, &NUMBERS), Upos::Num), "nummod"));
            true
        }
        1 => {
            deps.push((b.push(one(rng, &POSSESSIVES), Upos::Pron), "nmod:poss"));
            chance(rng, 0.3)
        }
        2 => {
            deps.push((b.push("a", Upos::Det), "det"));
            false
        }
        3 => {
            deps.push((b.push("this", Upos::Det), "det"));
            false
        }
        4 => true,
        _ => {
            deps.push((b.push("the", Upos::Det), "det"));
            chance(rng, 0.3)
        }
    };
    if chance(rng, 0.3) {
        deps.push((b.push(one(rng, &ADJECTIVES), Upos::Adj), "amod"));
    }
    if chance(rng, 0.08) {
        deps.push((b.push(one(rng, &MODIFIER_NOUNS), Upos::Noun), "compound"));
    }
    let (sg, pl) = one(rng, &NOUNS);
    let noun = b.push(if plural { pl } else { sg }, Upos::Noun);
    for (d, rel) in deps {
        b.attach(d, noun, rel);
    }
    if !nested && chance(rng, 0.1) {
        let pp = prepositional(b, rng);
        b.attach(pp, noun, "nmod");
    }
    noun
}

/// Preposition plus noun phrase; returns the noun, with the preposition
/// attached as `case`.
fn prepositional(b: &mut Builder, rng: &mut ChaCha8Rng) -> usize {
    let case = b.push(one(rng, &PREPOSITIONS), Upos::Adp);
    let noun = noun_phrase(b, rng, true);
    b.attach(case, noun, "case");
    noun
}

fn subject(b: &mut Builder, rng: &mut ChaCha8Rng) -> usize {
    if chance(rng, 0.55) {
        b.push(one(rng, &SUBJECT_PRONOUNS), Upos::Pron)
    } else {
        noun_phrase(b, rng, false)
    }
}

fn object(b: &mut Builder, rng: &mut ChaCha8Rng) -> usize {
    if chance(rng, 0.25) {
        b.push(one(rng, &OBJECT_PRONOUNS), Upos::Pron)
    } else {
        noun_phrase(b, rng, false)
    }
}

/// Optional auxiliary (and negation) plus a verb from `verbs`; returns the
/// verb. Without an auxiliary the verb is in the past tense.
fn verb_group(b: &mut Builder, rng: &mut ChaCha8Rng, verbs: &[(&'static str, &'static str)]) -> usize {
    let (base, past) = one(rng, verbs);
    let mut deps = Vec::new();
    if chance(rng, 0.3) {
        deps.push((b.push(one(rng, &AUX), Upos::Aux), "aux"));
        if chance(rng, 0.2) {
            deps.push((b.push("not", Upos::Part), "advmod"));
        }
    }
    let verb = b.push(if deps.is_empty() { past } else { base }, Upos::Verb);
    for (d, rel) in deps {
        b.attach(d, verb, rel);
    }
    verb
}

/// Clause; returns its head.
fn clause(b: &mut Builder, rng: &mut ChaCha8Rng, depth: usize) -> usize {
    let kind = rng.random::<f64>();
    if kind < 0.12 {
        let subj = subject(b, rng);
        let cop = b.push(one(rng, &COPULA), Upos::Aux);
        let intensifier = chance(rng, 0.3).then(|| b.push(one(rng, &INTENSIFIERS), Upos::Adv));
        let adj = b.push(one(rng, &ADJECTIVES), Upos::Adj);
        b.attach(subj, adj, "nsubj");
        b.attach(cop, adj, "cop");
        if let Some(i) = intensifier {
            b.attach(i, adj, "advmod");
        }
        return adj;
    }
    if depth == 0 && kind < 0.2 {
        let what = b.push("what", Upos::Pron);
        let aux = b.push(one(rng, &WH_AUX), Upos::Aux);
        let subj = subject(b, rng);
        let verb = b.push(one(rng, &TRANSITIVE).0, Upos::Verb);
        b.attach(what, verb, "obj");
        b.attach(aux, verb, "aux");
        b.attach(subj, verb, "nsubj");
        if chance(rng, 0.3) {
            let obl = prepositional(b, rng);
            b.attach(obl, verb, "obl");
        }
        return verb;
    }

    let subj = subject(b, rng);
    let shape = rng.random::<f64>();
    let verb;
    if shape < 0.5 {
        verb = verb_group(b, rng, &TRANSITIVE);
        let obj = object(b, rng);
        b.attach(obj, verb, "obj");
    } else if shape < 0.72 || depth > 0 && shape < 0.85 {
        verb = verb_group(b, rng, &INTRANSITIVE);
    } else if shape < 0.85 {
        verb = verb_group(b, rng, &SAY);
        let mark = chance(rng, 0.6).then(|| b.push("that", Upos::Sconj));
        let inner = clause(b, rng, depth + 1);
        if let Some(m) = mark {
            b.attach(m, inner, "mark");
        }
        b.attach(inner, verb, "ccomp");
    } else {
        verb = verb_group(b, rng, &WANT);
        let to = b.push("to", Upos::Part);
        let inner = b.push(one(rng, &TRANSITIVE).0, Upos::Verb);
        let obj = object(b, rng);
        b.attach(to, inner, "mark");
        b.attach(obj, inner, "obj");
        b.attach(inner, verb, "xcomp");
    }
    b.attach(subj, verb, "nsubj");

    if chance(rng, 0.3) {
        let obl = prepositional(b, rng);
        b.attach(obl, verb, "obl");
    }
    if chance(rng, 0.2) {
        let adv = b.push(one(rng, &ADVERBS), Upos::Adv);
        b.attach(adv, verb, "advmod");
    }
    if depth == 0 && chance(rng, 0.1) {
        let cc = b.push("and", Upos::Cconj);
        let second = b.push(one(rng, &TRANSITIVE).1, Upos::Verb);
        let obj = object(b, rng);
        b.attach(cc, second, "cc");
        b.attach(obj, second, "obj");
        b.attach(second, verb, "conj");
    }
    verb
}

/// One sentence from the given random source.
pub fn generate_sentence(rng: &mut ChaCha8Rng) -> Sentence {
    let mut b = Builder::default();
    let root = clause(&mut b, rng, 0);
    b.attach(root, 0, "root");
    b.into_sentence()
}

/// `n` sentences with ids `<prefix>-<k>` and `# text` comments. Sentence
/// `k` depends only on `seed` and `k`.
pub fn generate_corpus(n: usize, seed: u64, prefix: &str) -> Vec<Sentence> {
    (0..n)
        .map(|k| {
            let mut s = generate_sentence(&mut sentence_rng(seed, k));
            s.set_sent_id(&format!("{prefix}-{}", k + 1));
            let text = s.surface_text();
            s.set_text(&text);
            s
        })
        .collect()
}
