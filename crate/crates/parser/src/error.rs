use thiserror::Error;

use scud_core::eval::EvalError;

#[derive(Debug, Error)]
pub enum ParserError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("training corpus is empty")]
    EmptyTrain,
    #[error("dev corpus is empty")]
    EmptyDev,
    #[error("sentence {sentence}: relation `{relation}` is not in the label vocabulary")]
    UnknownLabel { sentence: usize, relation: String },
    #[error("sentence {sentence}: token {node} is unattached")]
    Unattached { sentence: usize, node: String },
    #[error("incompatible checkpoint: {component} has shape {found:?}, expected {expected:?}")]
    Incompatible {
        component: String,
        expected: Vec<usize>,
        found: Vec<usize>,
    },
    #[error(transparent)]
    Eval(#[from] EvalError),
}
