//! Graph-based dependency parser: word embeddings, a bidirectional LSTM
//! encoder, biaffine arc and label scorers and maximum-spanning-tree
//! decoding, with training, fine-tuning and checkpointing.

pub mod checkpoint;
pub mod config;
pub mod decode;
pub mod embeddings;
pub mod error;
pub mod model;
mod nn;
pub mod optim;
pub mod parse;
pub mod train;

pub use checkpoint::{load_checkpoint, save_checkpoint, CheckpointError};
pub use config::ParserConfig;
pub use decode::{assign_labels, decode_mst};
pub use embeddings::{load_embeddings, EmbeddingTable};
pub use error::ParserError;
pub use model::{ArcScores, Model};
pub use parse::parse;
pub use train::{finetune, train, DevMetrics, FinetuneReport, StopReason, TrainLog};

/// Floating-point type the network runs in: `f32` for training and
/// inference, `f64` for gradient checks.
pub trait Real:
    ndarray::LinalgScalar
    + ndarray::ScalarOperand
    + num_traits::Float
    + std::iter::Sum
    + std::ops::AddAssign
    + std::ops::SubAssign
    + std::ops::MulAssign
    + std::fmt::Debug
    + std::fmt::Display
    + Send
    + Sync
    + 'static
{
    fn from_f64(x: f64) -> Self;
    fn as_f64(self) -> f64;
}

impl Real for f32 {
    fn from_f64(x: f64) -> Self {
        x as f32
    }
    fn as_f64(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn as_f64(self) -> f64 {
        self
    }
}
