use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::ValueEnum;
use rayon::prelude::*;
use scud_core::agreement::{attachment_agreement, AgreementOptions};
use scud_core::augment::{augment_sentence, sentence_rng, AugmentConfig};
use scud_core::config::KeyValues;
use scud_core::eval::{uas_las, EvalOptions, EvalResult};
use scud_core::stats::{
    compare_distributions, frequencies_from_counts, length_histogram, relation_counts,
    tagset_coverage,
};
use scud_core::validate::{sentence_key, validate_keyed, Rule, RuleSet, ValidationReport};
use scud_core::{conllu, write_conllu, NodeId, Sentence, Token};
use scud_parser::{
    finetune, load_checkpoint, load_embeddings, parse, save_checkpoint, train, ParserConfig,
    TrainLog,
};
use serde_json::json;

use crate::settings::ConfigFile;
use crate::{
    AgreeArgs, AugmentArgs, Cli, Command, CompareArgs, EvalArgs, FinetuneArgs, Format, Hyper,
    ParseArgs, Preset, RenderArgs, StatsArgs, TrainArgs, ValidateArgs,
};

struct Run {
    config: ConfigFile,
    format: Format,
    seed: Option<u64>,
    tagset: Option<std::path::PathBuf>,
}

pub fn run(cli: Cli) -> Result<ExitCode> {
    let config = ConfigFile::load(cli.global.config.as_deref())?;
    if let Some(jobs) = config.jobs(cli.global.jobs)? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .context("starting worker threads")?;
    }
    let format = match cli.global.format {
        Some(f) => f,
        None => match config.format() {
            Some(name) => {
                Format::from_str(name, true).map_err(|e| anyhow!("config format: {e}"))?
            }
            None => Format::Text,
        },
    };
    let cx = Run {
        format,
        seed: cli.global.seed,
        tagset: cli.global.tagset,
        config,
    };
    match cli.command {
        Command::Validate(a) => validate(&cx, a),
        Command::Stats(a) => stats(&cx, a).map(|()| ExitCode::SUCCESS),
        Command::Compare(a) => compare(&cx, a).map(|()| ExitCode::SUCCESS),
        Command::Agree(a) => agree(&cx, a).map(|()| ExitCode::SUCCESS),
        Command::Augment(a) => augment(&cx, a).map(|()| ExitCode::SUCCESS),
        Command::Train(a) => train_cmd(&cx, a).map(|()| ExitCode::SUCCESS),
        Command::Finetune(a) => finetune_cmd(&cx, a).map(|()| ExitCode::SUCCESS),
        Command::Parse(a) => parse_cmd(&cx, a).map(|()| ExitCode::SUCCESS),
        Command::Eval(a) => eval(&cx, a).map(|()| ExitCode::SUCCESS),
        Command::Render(a) => render_cmd(a).map(|()| ExitCode::SUCCESS),
    }
}

fn read(path: &Path) -> Result<Vec<Sentence>> {
    conllu::read_file(path).with_context(|| format!("reading {}", path.display()))
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|()| out.flush())
                .context("writing stdout")
        }
    }
}

fn emit_json(value: &serde_json::Value) -> Result<()> {
    emit(None, &format!("{}\n", serde_json::to_string_pretty(value)?))
}

fn parse_rules(names: &[String]) -> Result<Vec<Rule>> {
    names
        .iter()
        .map(|n| n.trim().parse::<Rule>().map_err(|e| anyhow!("{e}")))
        .collect()
}

fn validate(cx: &Run, a: ValidateArgs) -> Result<ExitCode> {
    let tagset = cx.config.tagset(cx.tagset.as_deref())?;
    let corpus = read(&a.input)?;
    let mut rules = if a.rules.is_empty() {
        RuleSet::all()
    } else {
        RuleSet::only(&parse_rules(&a.rules)?)
    };
    for rule in parse_rules(&a.skip)? {
        rules = rules.without(rule);
    }
    let report = corpus
        .par_iter()
        .enumerate()
        .map(|(i, s)| validate_keyed(s, &sentence_key(s, i), &tagset, &rules))
        .reduce(ValidationReport::default, ValidationReport::merge);
    match cx.format {
        Format::Text | Format::Tsv => emit(None, &report.to_text())?,
        Format::Json => emit_json(&json!({
            "errors": report.error_count(),
            "warnings": report.warning_count(),
            "counts": report.counts.iter().map(|(r, n)| (r.to_string(), *n)).collect::<BTreeMap<_, _>>(),
            "violations": report.violations,
        }))?,
    }
    Ok(if a.strict && report.error_count() > 0 {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

fn stats(cx: &Run, a: StatsArgs) -> Result<()> {
    let tagset = cx.config.tagset(cx.tagset.as_deref())?;
    let corpus = read(&a.input)?;
    let counts = corpus
        .par_iter()
        .map(|s| relation_counts(std::slice::from_ref(s)))
        .reduce(BTreeMap::new, |mut acc, part| {
            for (k, v) in part {
                *acc.entry(k).or_insert(0) += v;
            }
            acc
        });
    let mut rows = frequencies_from_counts(&counts)?;
    if let Some(k) = a.top {
        rows.truncate(k);
    }
    let coverage = tagset_coverage(&corpus, &tagset);
    let lengths = length_histogram(&corpus);
    match cx.format {
        Format::Text => {
            let mut out = format!("{:<16}{:>8}{:>8}\n", "relation", "count", "freq");
            for r in &rows {
                out.push_str(&format!(
                    "{:<16}{:>8}{:>7.1}%\n",
                    r.name,
                    r.count,
                    r.rounded()
                ));
            }
            out.push_str(&format!(
                "\nsentences {}  mean length {:.1}  median length {:.1}\n",
                lengths.sentences,
                lengths.mean.unwrap_or(0.0),
                lengths.median.unwrap_or(0.0)
            ));
            out.push_str(&format!(
                "tagset: {} of {} relations used\n",
                coverage.used.len(),
                coverage.used.len() + coverage.unused.len()
            ));
            let list = |set: &std::collections::BTreeSet<String>| {
                set.iter().cloned().collect::<Vec<_>>().join(" ")
            };
            if !coverage.unused.is_empty() {
                out.push_str(&format!("unused: {}\n", list(&coverage.unused)));
            }
            if !coverage.unknown.is_empty() {
                out.push_str(&format!("unknown: {}\n", list(&coverage.unknown)));
            }
            emit(None, &out)
        }
        Format::Tsv => {
            let mut out = String::from("relation\tcount\tpercent\n");
            for r in &rows {
                out.push_str(&format!("{}\t{}\t{:.1}\n", r.name, r.count, r.rounded()));
            }
            emit(None, &out)
        }
        Format::Json => emit_json(&json!({
            "relations": rows,
            "coverage": coverage,
            "lengths": lengths,
        })),
    }
}

fn title(path: &Path) -> String {
    path.file_stem().map_or_else(
        || path.display().to_string(),
        |s| s.to_string_lossy().into_owned(),
    )
}

fn compare(cx: &Run, a: CompareArgs) -> Result<()> {
    let comparison = compare_distributions(&read(&a.left)?, &read(&a.right)?, a.top)?;
    let (l, r) = (title(&a.left), title(&a.right));
    match cx.format {
        Format::Text => emit(None, &comparison.to_table(&l, &r)),
        Format::Tsv => emit(None, &comparison.to_tsv(&l, &r)),
        Format::Json => emit_json(&json!({
            "left": { "title": l, "relations": comparison.left },
            "right": { "title": r, "relations": comparison.right },
        })),
    }
}

fn agree(cx: &Run, a: AgreeArgs) -> Result<()> {
    let options = AgreementOptions {
        surface_only: a.surface_only,
    };
    let result = attachment_agreement(&read(&a.first)?, &read(&a.second)?, options)?;
    if let Some(path) = &a.per_sentence {
        emit(Some(path), &result.to_tsv())?;
    }
    match cx.format {
        Format::Text => emit(
            None,
            &format!("{:.1} {:.1}\n", result.unlabeled_pct, result.labeled_pct),
        ),
        Format::Tsv => emit(
            None,
            &format!(
                "unlabeled\tlabeled\ttokens\n{:.1}\t{:.1}\t{}\n",
                result.unlabeled_pct, result.labeled_pct, result.token_count
            ),
        ),
        Format::Json => emit_json(&serde_json::to_value(&result)?),
    }
}

fn seed_kv(kv: &mut KeyValues, cx: &Run) -> Result<()> {
    // Flag beats the section key, which beats the global key.
    if let Some(seed) = cx.seed {
        kv.set("seed", seed.to_string());
    } else if kv.get("seed").is_none() {
        kv.set("seed", cx.config.seed(None)?.to_string());
    }
    Ok(())
}

fn augment(cx: &Run, a: AugmentArgs) -> Result<()> {
    let mut kv = cx.config.augment.clone();
    if let Some(rate) = a.rate {
        for key in [
            "word_split",
            "word_drop",
            "preterm_truncate",
            "stutter",
            "self_correct",
            "filler",
        ] {
            kv.set(key, rate.to_string());
        }
    }
    let rates = [
        ("word_split", a.word_split),
        ("word_drop", a.word_drop),
        ("preterm_truncate", a.preterm_truncate),
        ("stutter", a.stutter),
        ("self_correct", a.self_correct),
        ("filler", a.filler),
    ];
    for (key, value) in rates {
        if let Some(v) = value {
            kv.set(key, v.to_string());
        }
    }
    if let Some(n) = a.max_stutter_repeats {
        kv.set("max_stutter_repeats", n.to_string());
    }
    let mut base = cx.config.base.clone();
    if let Some(path) = &a.lexicon {
        let abs =
            std::path::absolute(path).with_context(|| format!("resolving {}", path.display()))?;
        kv.set("lexicon", abs.display().to_string());
        base = None;
    }
    seed_kv(&mut kv, cx)?;
    let mut config = AugmentConfig::default();
    config
        .apply(&kv, base.as_deref())
        .context("augment settings")?;

    let corpus = read(&a.input)?;
    let out: Vec<Sentence> = corpus
        .par_iter()
        .enumerate()
        .map(|(i, s)| augment_sentence(s, &config, &mut sentence_rng(config.seed, i)))
        .collect();
    emit(a.output.as_deref(), &write_conllu(&out)?)
}

fn hyper_kv(h: &Hyper) -> KeyValues {
    let mut kv = KeyValues::default();
    let mut put = |key: &str, value: Option<String>| {
        if let Some(v) = value {
            kv.set(key, v);
        }
    };
    let s = |v: Option<usize>| v.map(|v| v.to_string());
    let f = |v: Option<f64>| v.map(|v| v.to_string());
    put("embed_dim", s(h.embed_dim));
    put("pos_dim", s(h.pos_dim));
    put("hidden", s(h.hidden));
    put("layers", s(h.layers));
    put("arc_dim", s(h.arc_dim));
    put("label_dim", s(h.label_dim));
    put("dropout", f(h.dropout));
    put("word_dropout", f(h.word_dropout));
    put("learning_rate", f(h.learning_rate));
    put("clip", f(h.clip));
    put("batch_size", s(h.batch_size));
    put("max_epochs", s(h.max_epochs));
    put("patience", s(h.patience));
    put("finetune_epsilon", f(h.finetune_epsilon));
    put("grad_lanes", s(h.grad_lanes));
    if h.freeze_pretrained {
        put("freeze_pretrained", Some("true".into()));
    }
    kv
}

fn parser_config(cx: &Run, mut config: ParserConfig, hyper: &Hyper) -> Result<ParserConfig> {
    let mut kv = cx.config.parser.clone();
    let flags = hyper_kv(hyper);
    for key in flags.keys() {
        kv.set(key, flags.get(key).unwrap_or_default());
    }
    seed_kv(&mut kv, cx)?;
    config.apply(&kv).context("parser settings")?;
    Ok(config)
}

fn log_text(log: &TrainLog) -> String {
    let mut out = String::from("epoch  train_loss  dev_loss  dev_uas  dev_las\n");
    for r in &log.rows {
        out.push_str(&format!(
            "{:>5}  {:>10.4}  {:>8.4}  {:>7.2}  {:>7.2}\n",
            r.epoch, r.train_loss, r.dev_loss, r.dev_uas, r.dev_las
        ));
    }
    out
}

fn train_cmd(cx: &Run, a: TrainArgs) -> Result<()> {
    let base = match a.hyper.preset.unwrap_or(Preset::Default) {
        Preset::Default => ParserConfig::default(),
        Preset::Tiny => ParserConfig::tiny(),
    };
    let config = parser_config(cx, base, &a.hyper)?;
    let tagset = cx.config.tagset(cx.tagset.as_deref())?;
    let embeddings = match &a.embeddings {
        Some(p) => Some(
            load_embeddings(p, config.embed_dim)
                .with_context(|| format!("reading {}", p.display()))?,
        ),
        None => None,
    };
    let (model, log) = train(
        &read(&a.train)?,
        &read(&a.dev)?,
        embeddings.as_ref(),
        &tagset,
        &config,
    )?;
    save_checkpoint(&model, &a.output)
        .with_context(|| format!("writing {}", a.output.display()))?;
    if let Some(path) = &a.log {
        emit(Some(path), &log.to_tsv())?;
    }
    let best = log.best_las().unwrap_or(0.0);
    match cx.format {
        Format::Text => emit(None, &format!("{}best dev LAS {best:.2}\n", log_text(&log))),
        Format::Tsv => emit(None, &log.to_tsv()),
        Format::Json => emit_json(&json!({ "best_dev_las": best, "log": log_json(&log) })),
    }
}

fn log_json(log: &TrainLog) -> serde_json::Value {
    log.rows
        .iter()
        .map(|r| {
            json!({
                "epoch": r.epoch,
                "train_loss": r.train_loss,
                "dev_loss": r.dev_loss,
                "dev_uas": r.dev_uas,
                "dev_las": r.dev_las,
            })
        })
        .collect()
}

fn finetune_cmd(cx: &Run, a: FinetuneArgs) -> Result<()> {
    if a.hyper.preset.is_some() {
        bail!("--preset applies to train; fine-tuning starts from the checkpoint's settings");
    }
    let model =
        load_checkpoint(&a.model).with_context(|| format!("reading {}", a.model.display()))?;
    let config = parser_config(cx, model.config.clone(), &a.hyper)?;
    let (tuned, report) = finetune(&model, &read(&a.train)?, &read(&a.dev)?, &config)?;
    save_checkpoint(&tuned, &a.output)
        .with_context(|| format!("writing {}", a.output.display()))?;
    if let Some(path) = &a.log {
        emit(Some(path), &report.log.to_tsv())?;
    }
    let stop = format!("{:?}", report.stop).to_lowercase();
    match cx.format {
        Format::Text => emit(
            None,
            &format!(
                "{}before  UAS {:.2}  LAS {:.2}\nafter   UAS {:.2}  LAS {:.2}\nstopped: {stop}\n",
                log_text(&report.log),
                report.before.uas,
                report.before.las,
                report.after.uas,
                report.after.las
            ),
        ),
        Format::Tsv => emit(
            None,
            &format!(
                "stage\tdev_loss\tdev_uas\tdev_las\nbefore\t{:.4}\t{:.2}\t{:.2}\nafter\t{:.4}\t{:.2}\t{:.2}\n",
                report.before.loss,
                report.before.uas,
                report.before.las,
                report.after.loss,
                report.after.uas,
                report.after.las
            ),
        ),
        Format::Json => emit_json(&json!({
            "before": { "loss": report.before.loss, "uas": report.before.uas, "las": report.before.las },
            "after": { "loss": report.after.loss, "uas": report.after.uas, "las": report.after.las },
            "stop": stop,
            "log": log_json(&report.log),
        })),
    }
}

fn plain_text(path: &Path) -> Result<Vec<Sentence>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, line)| {
            let tokens = line
                .split_whitespace()
                .enumerate()
                .map(|(j, w)| Token::new(NodeId::surface(j as u32 + 1), w))
                .collect();
            let mut s = Sentence::new(tokens);
            s.set_sent_id(&(i + 1).to_string());
            s.set_text(line.trim());
            s
        })
        .collect())
}

fn parse_cmd(_cx: &Run, a: ParseArgs) -> Result<()> {
    let model =
        load_checkpoint(&a.model).with_context(|| format!("reading {}", a.model.display()))?;
    let input = if a.text {
        plain_text(&a.input)?
    } else {
        read(&a.input)?
    };
    emit(a.output.as_deref(), &write_conllu(&parse(&model, &input))?)
}

fn eval_json(result: &EvalResult) -> serde_json::Value {
    let confusion: Vec<_> = result
        .report
        .confusion
        .iter()
        .map(|((g, p), n)| json!({ "gold": g, "predicted": p, "count": n }))
        .collect();
    json!({
        "uas": result.uas,
        "las": result.las,
        "tokens": result.token_count,
        "head_correct": result.head_correct,
        "label_correct": result.label_correct,
        "relations": result.report.relations,
        "confusion": confusion,
    })
}

fn eval(cx: &Run, a: EvalArgs) -> Result<()> {
    let options = EvalOptions {
        include_empty: a.include_empty,
        exclude_punct: a.exclude_punct,
    };
    let result = uas_las(&read(&a.gold)?, &read(&a.predicted)?, options)?;
    let mut out = match cx.format {
        Format::Json => return emit_json(&eval_json(&result)),
        Format::Text => format!("{:.2} {:.2}\n", result.uas, result.las),
        Format::Tsv => format!(
            "uas\tlas\ttokens\n{:.2}\t{:.2}\t{}\n",
            result.uas, result.las, result.token_count
        ),
    };
    if a.relations {
        out.push('\n');
        out.push_str(&result.report.to_tsv());
    }
    if a.confusion {
        out.push('\n');
        out.push_str(&result.report.confusion_tsv());
    }
    emit(None, &out)
}

fn render_cmd(a: RenderArgs) -> Result<()> {
    let corpus = read(&a.input)?;
    let s = match (&a.id, a.sentence) {
        (Some(id), _) => corpus
            .iter()
            .find(|s| s.sent_id() == Some(id.as_str()))
            .ok_or_else(|| anyhow!("no sentence with sent_id {id}"))?,
        (None, n) => {
            let n = n.unwrap_or(1);
            if n == 0 || n > corpus.len() {
                bail!("sentence {n} out of range (1..={})", corpus.len());
            }
            &corpus[n - 1]
        }
    };
    let text = if a.svg {
        crate::render::svg(s)
    } else {
        crate::render::ascii(s)
    };
    emit(a.output.as_deref(), &text)
}
