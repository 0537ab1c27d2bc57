//! Training from scratch and fine-tuning from a checkpoint.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use scud_core::eval::{uas_las, EvalOptions};
use scud_core::{Head, Sentence, Tagset};

use crate::config::ParserConfig;
use crate::embeddings::{EmbeddingTable, Vocab, UNK_ID};
use crate::error::ParserError;
use crate::model::{loss_and_grads, score, Example, Grads, Model, Params};
use crate::optim::Adam;
use crate::parse::parse;

const SHUFFLE_STREAM: u64 = u64::MAX;
const INIT_EPOCH: u64 = u64::MAX;

/// Generator for one epoch and purpose; `stream` is the example index for
/// dropout.
fn epoch_rng(seed: u64, epoch: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ epoch.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(stream);
    rng
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogRow {
    pub epoch: usize,
    /// Mean per-token loss (arc plus label).
    pub train_loss: f64,
    pub dev_loss: f64,
    pub dev_uas: f64,
    pub dev_las: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainLog {
    pub rows: Vec<LogRow>,
}

impl TrainLog {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("epoch\ttrain_loss\tdev_loss\tdev_uas\tdev_las\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{}\t{:.6}\t{:.6}\t{:.2}\t{:.2}",
                r.epoch, r.train_loss, r.dev_loss, r.dev_uas, r.dev_las
            );
        }
        out
    }

    pub fn best_las(&self) -> Option<f64> {
        self.rows.iter().map(|r| r.dev_las).reduce(f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DevMetrics {
    pub loss: f64,
    pub uas: f64,
    pub las: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    /// No epochs requested.
    Skipped,
    MaxEpochs,
    Patience,
    /// Dev loss stabilized.
    Converged,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FinetuneReport {
    pub before: DevMetrics,
    pub after: DevMetrics,
    pub log: TrainLog,
    pub stop: StopReason,
}

/// Position of the surface head of `s.tokens[i]`; heads that are empty
/// nodes are followed up to the nearest surface ancestor.
fn surface_head(s: &Sentence, i: usize, index: usize, positions: &HashMap<u32, usize>) -> Result<usize, ParserError> {
    let mut token = &s.tokens[i];
    for _ in 0..=s.tokens.len() {
        match token.head {
            Head::Root => return Ok(0),
            Head::Unattached => break,
            Head::Node(id) if !id.is_empty_node() => {
                if let Some(&p) = positions.get(&id.major) {
                    return Ok(p);
                }
                break;
            }
            Head::Node(id) => match s.get(id) {
                Some(t) => token = t,
                None => break,
            },
        }
    }
    Err(ParserError::Unattached {
        sentence: index + 1,
        node: s.tokens[i].id.to_string(),
    })
}

/// Training input for sentence number `index` (0-based) with gold heads
/// and labels.
pub fn gold_example(model: &Model, s: &Sentence, index: usize) -> Result<Example, ParserError> {
    let mut ex = model.example(s);
    let positions: HashMap<u32, usize> = s.surface().enumerate().map(|(p, t)| (t.id.major, p + 1)).collect();
    for (i, t) in s.tokens.iter().enumerate() {
        if t.id.is_empty_node() {
            continue;
        }
        ex.heads.push(surface_head(s, i, index, &positions)?);
        let relation = t.relation().ok_or_else(|| ParserError::Unattached {
            sentence: index + 1,
            node: t.id.to_string(),
        })?;
        let label = model.label_index(relation).ok_or_else(|| ParserError::UnknownLabel {
            sentence: index + 1,
            relation: relation.to_owned(),
        })?;
        ex.labels.push(label);
    }
    Ok(ex)
}

fn gold_examples(model: &Model, corpus: &[Sentence]) -> Result<Vec<Example>, ParserError> {
    corpus
        .iter()
        .enumerate()
        .filter(|(_, s)| s.surface_len() > 0)
        .map(|(i, s)| gold_example(model, s, i))
        .collect()
}

/// Training-set word rows seen exactly once.
fn singletons(examples: &[Example]) -> HashSet<usize> {
    let mut counts: HashMap<usize, usize> = HashMap::new();
    for ex in examples {
        for &w in &ex.words[1..] {
            *counts.entry(w).or_default() += 1;
        }
    }
    counts.into_iter().filter(|&(_, c)| c == 1).map(|(w, _)| w).collect()
}

/// Mean per-token loss and attachment scores on `dev`.
fn evaluate(model: &Model, dev: &[Sentence], examples: &[Example]) -> Result<DevMetrics, ParserError> {
    let (loss, tokens) = examples
        .par_iter()
        .map(|ex| {
            let l = score(&model.params, &model.config, ex).gold_loss(ex);
            ((l.arc + l.label) as f64, l.tokens)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((0.0, 0), |(a, n), (l, t)| (a + l, n + t));
    let predicted = parse(model, dev);
    let scores = uas_las(dev, &predicted, EvalOptions::default())?;
    Ok(DevMetrics {
        loss: loss / tokens.max(1) as f64,
        uas: scores.uas,
        las: scores.las,
    })
}

/// Mean training loss without dropout.
fn clean_loss(model: &Model, examples: &[Example]) -> f64 {
    let (loss, tokens) = examples
        .par_iter()
        .map(|ex| {
            let l = loss_and_grads(&model.params, &model.config, ex, None, None);
            ((l.arc + l.label) as f64, l.tokens)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((0.0, 0), |(a, n), (l, t)| (a + l, n + t));
    loss / tokens.max(1) as f64
}

/// One pass over `examples` in a seeded order. Returns the mean per-token
/// training loss.
fn run_epoch(
    model: &mut Model,
    adam: &mut Adam,
    examples: &[Example],
    singles: &HashSet<usize>,
    epoch: usize,
) -> f64 {
    let config = model.config.clone();
    let mut order: Vec<usize> = (0..examples.len()).collect();
    order.shuffle(&mut epoch_rng(config.seed, epoch as u64, SHUFFLE_STREAM));
    let frozen = if config.freeze_pretrained {
        2..2 + model.pretrained_rows
    } else {
        0..0
    };
    let mut total = 0.0;
    let mut tokens = 0;
    for batch in order.chunks(config.batch_size) {
        // Fixed lane partition: the summation order depends only on the
        // batch and `grad_lanes`.
        let lane_len = batch.len().div_ceil(config.grad_lanes);
        let params = &model.params;
        let lanes: Vec<(Grads<f32>, f64, usize)> = batch
            .par_chunks(lane_len)
            .map(|lane| {
                let mut grads = Grads::zeros(params);
                let mut loss = 0.0;
                let mut n = 0;
                for &i in lane {
                    let mut rng = epoch_rng(config.seed, epoch as u64, i as u64);
                    let mut ex = examples[i].clone();
                    for w in &mut ex.words[1..] {
                        if singles.contains(w) && rng.random::<f64>() < config.word_dropout {
                            *w = UNK_ID;
                        }
                    }
                    let l = loss_and_grads(params, &config, &ex, Some(&mut rng), Some(&mut grads));
                    loss += (l.arc + l.label) as f64;
                    n += l.tokens;
                }
                (grads, loss, n)
            })
            .collect();
        let mut lanes = lanes.into_iter();
        let (mut grads, mut loss, mut n) = lanes.next().expect("non-empty batch");
        for (g, l, t) in lanes {
            grads.add_assign(&g);
            loss += l;
            n += t;
        }
        grads.scale(1.0 / n.max(1) as f32);
        adam.step(&mut model.params, &grads, frozen.clone());
        total += loss;
        tokens += n;
    }
    total / tokens.max(1) as f64
}

/// Label vocabulary, word vocabulary and fresh parameters.
fn initial_model(
    train: &[Sentence],
    embeddings: Option<&EmbeddingTable>,
    tagset: &Tagset,
    config: &ParserConfig,
) -> Result<Model, ParserError> {
    let mut vocab = Vocab::default();
    let mut pretrained_rows = 0;
    if let Some(table) = embeddings {
        if table.dim() != config.embed_dim {
            return Err(ParserError::Config(format!(
                "embedding file has dimension {}, embed_dim is {}",
                table.dim(),
                config.embed_dim
            )));
        }
        for w in &table.vocab.words()[2..] {
            vocab.insert(w);
        }
        pretrained_rows = table.loaded();
    }
    for s in train {
        for t in s.surface() {
            if vocab.get(&t.form).is_none() && vocab.get(&t.form.to_lowercase()).is_none() {
                vocab.insert(&t.form);
            }
        }
    }
    let labels = tagset.names().to_vec();
    let mut rng = epoch_rng(config.seed, INIT_EPOCH, 0);
    let mut params = Params::init(config, &vocab, labels.len(), embeddings, &mut rng);
    if let Some(table) = embeddings {
        // `<unk>` starts from the mean pretrained vector.
        params.words.row_mut(UNK_ID).assign(&table.matrix.row(UNK_ID));
    }
    Ok(Model {
        config: config.clone(),
        vocab,
        labels,
        pretrained_rows,
        params,
    })
}

/// Trains a parser from scratch and returns the parameters with the best
/// dev LAS along with the per-epoch log (row 0 is before any update).
pub fn train(
    train: &[Sentence],
    dev: &[Sentence],
    embeddings: Option<&EmbeddingTable>,
    tagset: &Tagset,
    config: &ParserConfig,
) -> Result<(Model, TrainLog), ParserError> {
    config.validate()?;
    if train.iter().all(|s| s.surface_len() == 0) {
        return Err(ParserError::EmptyTrain);
    }
    if dev.iter().all(|s| s.surface_len() == 0) {
        return Err(ParserError::EmptyDev);
    }
    let mut model = initial_model(train, embeddings, tagset, config)?;
    let examples = gold_examples(&model, train)?;
    let dev_examples = gold_examples(&model, dev)?;
    let singles = singletons(&examples);
    let mut adam = Adam::new(&model.params, config);

    let start = evaluate(&model, dev, &dev_examples)?;
    let mut log = TrainLog::default();
    log.rows.push(LogRow {
        epoch: 0,
        train_loss: clean_loss(&model, &examples),
        dev_loss: start.loss,
        dev_uas: start.uas,
        dev_las: start.las,
    });
    let mut best = (start.las, model.params.clone());
    let mut stale = 0;
    for epoch in 1..=config.max_epochs {
        let train_loss = run_epoch(&mut model, &mut adam, &examples, &singles, epoch);
        let m = evaluate(&model, dev, &dev_examples)?;
        log.rows.push(LogRow {
            epoch,
            train_loss,
            dev_loss: m.loss,
            dev_uas: m.uas,
            dev_las: m.las,
        });
        if m.las > best.0 {
            best = (m.las, model.params.clone());
            stale = 0;
        } else {
            stale += 1;
            if stale >= config.patience {
                break;
            }
        }
    }
    model.params = best.1;
    Ok((model, log))
}

/// Continues training `checkpoint` on new data with a fresh optimizer.
/// Stops once the relative dev-loss change stays below
/// `finetune_epsilon` for three evaluations in a row, or on patience or
/// `max_epochs`. The best state by dev LAS, including the starting one, is
/// returned.
pub fn finetune(
    checkpoint: &Model,
    train: &[Sentence],
    dev: &[Sentence],
    config: &ParserConfig,
) -> Result<(Model, FinetuneReport), ParserError> {
    config.validate()?;
    if let Some((field, expected, found)) = checkpoint.config.shape_differences(config).into_iter().next() {
        return Err(ParserError::Incompatible {
            component: field.to_owned(),
            expected: vec![expected],
            found: vec![found],
        });
    }
    if train.iter().all(|s| s.surface_len() == 0) {
        return Err(ParserError::EmptyTrain);
    }
    if dev.iter().all(|s| s.surface_len() == 0) {
        return Err(ParserError::EmptyDev);
    }
    let mut model = checkpoint.clone();
    model.config = config.clone();
    let dev_examples = gold_examples(&model, dev)?;
    let before = evaluate(&model, dev, &dev_examples)?;
    let mut log = TrainLog::default();
    let start_row = |train_loss| LogRow {
        epoch: 0,
        train_loss,
        dev_loss: before.loss,
        dev_uas: before.uas,
        dev_las: before.las,
    };
    if config.max_epochs == 0 || config.finetune_epsilon.is_infinite() {
        let examples = gold_examples(&model, train)?;
        log.rows.push(start_row(clean_loss(&model, &examples)));
        let report = FinetuneReport {
            before,
            after: before,
            log,
            stop: StopReason::Skipped,
        };
        return Ok((checkpoint.clone(), report));
    }

    // New words start as copies of `<unk>`.
    let old_rows = model.vocab.len();
    for s in train {
        for t in s.surface() {
            if model.vocab.get(&t.form).is_none() && model.vocab.get(&t.form.to_lowercase()).is_none() {
                model.vocab.insert(&t.form);
            }
        }
    }
    if model.vocab.len() > old_rows {
        let unk = model.params.words.row(UNK_ID).to_owned();
        let mut words = ndarray::Array2::zeros((model.vocab.len(), config.embed_dim));
        words.slice_mut(ndarray::s![..old_rows, ..]).assign(&model.params.words);
        for r in old_rows..model.vocab.len() {
            words.row_mut(r).assign(&unk);
        }
        model.params.words = words;
    }
    let examples = gold_examples(&model, train)?;
    let singles = singletons(&examples);
    let mut adam = Adam::new(&model.params, config);
    log.rows.push(start_row(clean_loss(&model, &examples)));

    let mut best = (before, model.params.clone());
    let mut stale = 0;
    let mut calm = 0;
    let mut previous_loss = before.loss;
    let mut stop = StopReason::MaxEpochs;
    for epoch in 1..=config.max_epochs {
        let train_loss = run_epoch(&mut model, &mut adam, &examples, &singles, epoch);
        let m = evaluate(&model, dev, &dev_examples)?;
        log.rows.push(LogRow {
            epoch,
            train_loss,
            dev_loss: m.loss,
            dev_uas: m.uas,
            dev_las: m.las,
        });
        if m.las > best.0.las {
            best = (m, model.params.clone());
            stale = 0;
        } else {
            stale += 1;
        }
        let change = (m.loss - previous_loss).abs() / previous_loss.abs().max(f64::MIN_POSITIVE);
        previous_loss = m.loss;
        calm = if change < config.finetune_epsilon { calm + 1 } else { 0 };
        if calm >= 3 {
            stop = StopReason::Converged;
            break;
        }
        if stale >= config.patience {
            stop = StopReason::Patience;
            break;
        }
    }
    model.params = best.1;
    let report = FinetuneReport {
        before,
        after: best.0,
        log,
        stop,
    };
    Ok((model, report))
}
