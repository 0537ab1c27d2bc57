use serde::{Deserialize, Serialize};

use scud_core::config::{ConfigError, KeyValues};

use crate::error::ParserError;

/// Network sizes and training hyperparameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParserConfig {
    /// Word embedding size.
    pub embed_dim: usize,
    /// Gold POS embedding size; 0 disables POS input.
    pub pos_dim: usize,
    /// LSTM hidden size per direction.
    pub hidden: usize,
    pub layers: usize,
    pub arc_dim: usize,
    pub label_dim: usize,
    pub dropout: f64,
    /// Chance of replacing a training singleton by `<unk>`.
    pub word_dropout: f64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    /// Global gradient-norm ceiling.
    pub clip: f64,
    /// Sentences per update.
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Evaluations without dev LAS improvement before stopping.
    pub patience: usize,
    /// Fine-tuning stops once relative dev-loss change stays below this
    /// for three evaluations in a row.
    pub finetune_epsilon: f64,
    pub seed: u64,
    /// Fixed number of gradient partial sums per batch. Results depend on
    /// this value but not on the thread count.
    pub grad_lanes: usize,
    /// Keep rows loaded from pretrained embeddings fixed.
    pub freeze_pretrained: bool,
}

impl Default for ParserConfig {
    fn default() -> Self {
        ParserConfig {
            embed_dim: 100,
            pos_dim: 0,
            hidden: 200,
            layers: 2,
            arc_dim: 400,
            label_dim: 100,
            dropout: 0.33,
            word_dropout: 0.2,
            learning_rate: 2e-3,
            beta1: 0.9,
            beta2: 0.9,
            clip: 5.0,
            batch_size: 32,
            max_epochs: 100,
            patience: 20,
            finetune_epsilon: 1e-3,
            seed: 42,
            grad_lanes: 4,
            freeze_pretrained: false,
        }
    }
}

pub const CONFIG_KEYS: [&str; 19] = [
    "embed_dim",
    "pos_dim",
    "hidden",
    "layers",
    "arc_dim",
    "label_dim",
    "dropout",
    "word_dropout",
    "learning_rate",
    "beta1",
    "beta2",
    "clip",
    "batch_size",
    "max_epochs",
    "patience",
    "finetune_epsilon",
    "seed",
    "grad_lanes",
    "freeze_pretrained",
];

impl ParserConfig {
    /// Small network for tests and quick experiments.
    pub fn tiny() -> Self {
        ParserConfig {
            embed_dim: 16,
            hidden: 24,
            layers: 1,
            arc_dim: 32,
            label_dim: 16,
            batch_size: 8,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), ParserError> {
        let dims = [
            ("embed_dim", self.embed_dim),
            ("hidden", self.hidden),
            ("layers", self.layers),
            ("arc_dim", self.arc_dim),
            ("label_dim", self.label_dim),
            ("batch_size", self.batch_size),
            ("grad_lanes", self.grad_lanes),
        ];
        for (name, v) in dims {
            if v == 0 {
                return Err(ParserError::Config(format!("{name} must be positive")));
            }
        }
        let rates = [
            ("dropout", self.dropout),
            ("word_dropout", self.word_dropout),
            ("beta1", self.beta1),
            ("beta2", self.beta2),
        ];
        for (name, v) in rates {
            if !(0.0..1.0).contains(&v) {
                return Err(ParserError::Config(format!("{name} must be in [0, 1)")));
            }
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(ParserError::Config("learning_rate must be positive".into()));
        }
        if !(self.clip > 0.0) {
            return Err(ParserError::Config("clip must be positive".into()));
        }
        if !(self.finetune_epsilon >= 0.0) {
            return Err(ParserError::Config("finetune_epsilon must be non-negative".into()));
        }
        Ok(())
    }

    /// Overrides fields from `key = value` settings.
    pub fn apply(&mut self, kv: &KeyValues) -> Result<(), ConfigError> {
        kv.ensure_known(&CONFIG_KEYS)?;
        macro_rules! set {
            ($($field:ident),*) => {
                $(if let Some(v) = kv.parsed(stringify!($field))? {
                    self.$field = v;
                })*
            };
        }
        set!(
            embed_dim,
            pos_dim,
            hidden,
            layers,
            arc_dim,
            label_dim,
            dropout,
            word_dropout,
            learning_rate,
            beta1,
            beta2,
            clip,
            batch_size,
            max_epochs,
            patience,
            finetune_epsilon,
            seed,
            grad_lanes,
            freeze_pretrained
        );
        Ok(())
    }

    /// Differences in network shape, as `(field, self, other)`.
    pub fn shape_differences(&self, other: &ParserConfig) -> Vec<(&'static str, usize, usize)> {
        [
            ("embed_dim", self.embed_dim, other.embed_dim),
            ("pos_dim", self.pos_dim, other.pos_dim),
            ("hidden", self.hidden, other.hidden),
            ("layers", self.layers, other.layers),
            ("arc_dim", self.arc_dim, other.arc_dim),
            ("label_dim", self.label_dim, other.label_dim),
        ]
        .into_iter()
        .filter(|(_, a, b)| a != b)
        .collect()
    }
}
