use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod render;
mod settings;

/// Treebank toolkit for dependency-annotated dialog transcripts.
///
/// Settings resolve as: command-line flag, then the `--config` file, then
/// the built-in default. The tagset additionally falls back to
/// `SCUDKIT_TAGSET` before the bundled one.
///
/// Exit status: 0 on success, 1 when `validate --strict` finds errors,
/// 2 on usage or I/O errors.
#[derive(Debug, Parser)]
#[command(name = "scudkit", version)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Relation tagset file, one name per line [config: tagset; env: SCUDKIT_TAGSET; default: bundled]
    #[arg(long, global = true, value_name = "PATH")]
    pub tagset: Option<PathBuf>,
    /// Report format [config: format; default: text]
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Worker threads for per-sentence work; 0 uses every core [config: jobs; default: 0]
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,
    /// Random seed for augmentation and training [config: seed; default: 42]
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Settings file of `key = value` lines; `augment.*` and `parser.*`
    /// keys configure those commands
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Tsv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check annotation conventions and report violations
    Validate(ValidateArgs),
    /// Relation frequencies, tagset coverage and sentence lengths
    Stats(StatsArgs),
    /// Top relation frequencies of two corpora side by side
    Compare(CompareArgs),
    /// Agreement between two annotation passes (unlabeled, labeled)
    Agree(AgreeArgs),
    /// Add synthetic speech-recognition noise to a corpus
    Augment(AugmentArgs),
    /// Train a parser from scratch
    Train(TrainArgs),
    /// Continue training a saved parser on new data
    Finetune(FinetuneArgs),
    /// Predict heads and relations with a saved parser
    Parse(ParseArgs),
    /// Attachment scores of predictions against gold (UAS, LAS)
    Eval(EvalArgs),
    /// Draw one sentence as a text tree or SVG
    Render(RenderArgs),
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// CoNLL-U file
    pub input: PathBuf,
    /// Exit with status 1 when any error-severity violation is found
    #[arg(long)]
    pub strict: bool,
    /// Check only these rules, comma separated (e.g. R1,R2)
    #[arg(long, value_delimiter = ',', value_name = "RULES")]
    pub rules: Vec<String>,
    /// Skip these rules, comma separated
    #[arg(long, value_delimiter = ',', value_name = "RULES")]
    pub skip: Vec<String>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// CoNLL-U file
    pub input: PathBuf,
    /// Show only the most frequent relations
    #[arg(long, value_name = "K")]
    pub top: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Left corpus
    pub left: PathBuf,
    /// Right corpus
    pub right: PathBuf,
    /// Rows per side
    #[arg(long, value_name = "K", default_value_t = 10)]
    pub top: usize,
}

#[derive(Debug, Args)]
pub struct AgreeArgs {
    /// First annotation pass
    pub first: PathBuf,
    /// Second annotation pass over the same tokens
    pub second: PathBuf,
    /// Ignore empty nodes
    #[arg(long)]
    pub surface_only: bool,
    /// Also write per-sentence counts as TSV to this file
    #[arg(long, value_name = "PATH")]
    pub per_sentence: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    /// Clean CoNLL-U corpus
    pub input: PathBuf,
    /// Output file [default: stdout]
    pub output: Option<PathBuf>,
    /// Probability of splitting one word in two [config: augment.word_split]
    #[arg(long, value_name = "P")]
    pub word_split: Option<f64>,
    /// Probability of dropping a function word [config: augment.word_drop]
    #[arg(long, value_name = "P")]
    pub word_drop: Option<f64>,
    /// Probability of cutting the utterance short [config: augment.preterm_truncate]
    #[arg(long, value_name = "P")]
    pub preterm_truncate: Option<f64>,
    /// Probability of inserting a stutter [config: augment.stutter]
    #[arg(long, value_name = "P")]
    pub stutter: Option<f64>,
    /// Probability of inserting a self-correction [config: augment.self_correct]
    #[arg(long, value_name = "P")]
    pub self_correct: Option<f64>,
    /// Probability of inserting a filler word [config: augment.filler]
    #[arg(long, value_name = "P")]
    pub filler: Option<f64>,
    /// Set every rate at once; per-rate flags still take precedence
    #[arg(long, value_name = "P")]
    pub rate: Option<f64>,
    /// Filler words, one per line [config: augment.lexicon]
    #[arg(long, value_name = "PATH")]
    pub lexicon: Option<PathBuf>,
    /// Most repeats per stutter [config: augment.max_stutter_repeats; default: 2]
    #[arg(long, value_name = "N")]
    pub max_stutter_repeats: Option<usize>,
}

/// Network and optimizer settings; unset flags fall back to `parser.*`
/// config keys, then to the preset.
#[derive(Debug, Default, Args)]
pub struct Hyper {
    /// Starting configuration (train only)
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Word embedding size
    #[arg(long, value_name = "N")]
    pub embed_dim: Option<usize>,
    /// Gold POS embedding size; 0 disables POS input
    #[arg(long, value_name = "N")]
    pub pos_dim: Option<usize>,
    /// LSTM hidden size per direction
    #[arg(long, value_name = "N")]
    pub hidden: Option<usize>,
    /// LSTM layers
    #[arg(long, value_name = "N")]
    pub layers: Option<usize>,
    /// Arc MLP size
    #[arg(long, value_name = "N")]
    pub arc_dim: Option<usize>,
    /// Label MLP size
    #[arg(long, value_name = "N")]
    pub label_dim: Option<usize>,
    /// Dropout rate
    #[arg(long, value_name = "P")]
    pub dropout: Option<f64>,
    /// Chance of replacing a training singleton by the unknown word
    #[arg(long, value_name = "P")]
    pub word_dropout: Option<f64>,
    /// Adam learning rate
    #[arg(long, value_name = "LR")]
    pub learning_rate: Option<f64>,
    /// Global gradient-norm ceiling
    #[arg(long, value_name = "X")]
    pub clip: Option<f64>,
    /// Sentences per update
    #[arg(long, value_name = "N")]
    pub batch_size: Option<usize>,
    /// Epoch limit
    #[arg(long, value_name = "N")]
    pub max_epochs: Option<usize>,
    /// Evaluations without dev LAS improvement before stopping
    #[arg(long, value_name = "N")]
    pub patience: Option<usize>,
    /// Fine-tuning stops once relative dev-loss change stays below this three times in a row
    #[arg(long, value_name = "X")]
    pub finetune_epsilon: Option<f64>,
    /// Gradient partial sums per batch; results depend on this, not on --jobs
    #[arg(long, value_name = "N")]
    pub grad_lanes: Option<usize>,
    /// Keep pretrained embedding rows fixed
    #[arg(long)]
    pub freeze_pretrained: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Default,
    Tiny,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Training corpus
    #[arg(long, value_name = "PATH")]
    pub train: PathBuf,
    /// Development corpus for model selection
    #[arg(long, value_name = "PATH")]
    pub dev: PathBuf,
    /// Pretrained word vectors, text format `word v1 ... vD`
    #[arg(long, value_name = "PATH")]
    pub embeddings: Option<PathBuf>,
    /// Checkpoint to write
    #[arg(short, long, value_name = "PATH")]
    pub output: PathBuf,
    /// Write the per-epoch log as TSV
    #[arg(long, value_name = "PATH")]
    pub log: Option<PathBuf>,
    #[command(flatten)]
    pub hyper: Hyper,
}

#[derive(Debug, Args)]
pub struct FinetuneArgs {
    /// Checkpoint to start from
    #[arg(long, value_name = "PATH")]
    pub model: PathBuf,
    /// Training corpus
    #[arg(long, value_name = "PATH")]
    pub train: PathBuf,
    /// Development corpus for model selection and stopping
    #[arg(long, value_name = "PATH")]
    pub dev: PathBuf,
    /// Checkpoint to write
    #[arg(short, long, value_name = "PATH")]
    pub output: PathBuf,
    /// Write the per-epoch log as TSV
    #[arg(long, value_name = "PATH")]
    pub log: Option<PathBuf>,
    #[command(flatten)]
    pub hyper: Hyper,
}

#[derive(Debug, Args)]
pub struct ParseArgs {
    /// Checkpoint
    #[arg(long, value_name = "PATH")]
    pub model: PathBuf,
    /// CoNLL-U input; existing heads and relations are replaced
    pub input: PathBuf,
    /// Output file [default: stdout]
    pub output: Option<PathBuf>,
    /// Read plain text instead: one utterance per line, tokens split on whitespace
    #[arg(long)]
    pub text: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Gold corpus
    pub gold: PathBuf,
    /// Predicted corpus over the same tokens
    pub predicted: PathBuf,
    /// Score empty nodes too
    #[arg(long)]
    pub include_empty: bool,
    /// Skip tokens whose gold relation is punct
    #[arg(long)]
    pub exclude_punct: bool,
    /// Append per-relation precision, recall and F1
    #[arg(long)]
    pub relations: bool,
    /// Append label confusion counts over correctly attached tokens
    #[arg(long)]
    pub confusion: bool,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// CoNLL-U file
    pub input: PathBuf,
    /// 1-based position of the sentence [default: 1]
    #[arg(long, value_name = "N", conflicts_with = "id")]
    pub sentence: Option<usize>,
    /// Select the sentence by sent_id
    #[arg(long, value_name = "ID")]
    pub id: Option<String>,
    /// Emit SVG instead of a text tree
    #[arg(long)]
    pub svg: bool,
    /// Output file [default: stdout]
    #[arg(short, long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("scudkit: error: {e:#}");
            ExitCode::from(2)
        }
    }
}
