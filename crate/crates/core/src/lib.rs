//! Treebank tooling for dependency-annotated spoken-dialog transcripts.
//!
//! The crate covers the annotation side of the toolkit: the sentence
//! model and CoNLL-U I/O, validation of the scheme's conventions, corpus
//! statistics, inter-annotator agreement, attachment-score evaluation and
//! synthetic speech-noise augmentation.

mod align;
pub mod agreement;
pub mod augment;
pub mod config;
pub mod conllu;
pub mod eval;
pub mod faults;
pub mod stats;
pub mod synth;
pub mod tagset;
pub mod treebank;
pub mod validate;

pub use align::AlignError;
pub use conllu::{parse_conllu, write_conllu, ConlluError};
pub use tagset::Tagset;
pub use treebank::{Head, NodeId, Relation, Sentence, Token, Upos};
