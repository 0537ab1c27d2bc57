use std::path::PathBuf;
use std::process::{Command, Output};

use scud_core::conllu::{read_file, write_file};
use scud_core::synth::generate_corpus;

const SAMPLE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/data/sample.conllu");

fn scudkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scudkit"))
        .args(args)
        .env_remove("SCUDKIT_TAGSET")
        .output()
        .expect("run scudkit")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

struct Scratch(PathBuf);

impl Scratch {
    fn new(name: &str) -> Scratch {
        let dir = std::env::temp_dir().join(format!("scudkit-{name}-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        Scratch(dir)
    }

    fn path(&self, file: &str) -> String {
        self.0.join(file).display().to_string()
    }

    fn corpus(&self, file: &str, n: usize, seed: u64) -> String {
        let path = self.path(file);
        write_file(&path, &generate_corpus(n, seed, file)).unwrap();
        path
    }
}

impl Drop for Scratch {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

#[test]
fn strict_validation_of_a_clean_file_succeeds() {
    let out = scudkit(&["validate", "--strict", SAMPLE]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("# errors\t0"));
}

#[test]
fn strict_validation_fails_on_errors_only_when_asked() {
    let dir = Scratch::new("strict");
    let bad = dir.path("bad.conllu");
    std::fs::write(
        &bad,
        "1\thi\t_\tINTJ\t_\t_\t0\troot\t_\t_\n2\tthere\t_\tADV\t_\t_\t1\tgreeting\t_\t_\n\n",
    )
    .unwrap();
    assert_eq!(
        scudkit(&["validate", "--strict", &bad]).status.code(),
        Some(1)
    );
    let lenient = scudkit(&["validate", &bad]);
    assert_eq!(lenient.status.code(), Some(0));
    assert!(stdout(&lenient).contains("\tR3\terror\t"));
    assert_eq!(
        scudkit(&["validate", "--strict", "--skip", "R3", &bad])
            .status
            .code(),
        Some(0)
    );
    let json = scudkit(&["validate", "--format", "json", &bad]);
    let value: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(value["errors"], 1);
}

#[test]
fn self_agreement_is_perfect() {
    let out = scudkit(&["agree", SAMPLE, SAMPLE]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "100.0 100.0\n");
}

#[test]
fn self_evaluation_is_perfect() {
    let dir = Scratch::new("eval");
    let gold = dir.corpus("gold.conllu", 20, 3);
    let out = scudkit(&["eval", &gold, &gold]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "100.00 100.00\n");
    let with_tables = stdout(&scudkit(&[
        "eval",
        "--relations",
        "--confusion",
        &gold,
        &gold,
    ]));
    assert!(with_tables.contains("relation\tgold\tpredicted"));
    assert!(with_tables.contains("gold\tpredicted\tcount"));
}

#[test]
fn usage_and_io_errors_exit_with_two() {
    assert_eq!(scudkit(&["frobnicate"]).status.code(), Some(2));
    let unknown = scudkit(&["validate", "--no-such-flag", SAMPLE]);
    assert_eq!(unknown.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("Usage"));
    assert_eq!(
        scudkit(&["stats", "/no/such/file.conllu"]).status.code(),
        Some(2)
    );
    // Unattached gold tokens cannot be scored.
    assert_eq!(scudkit(&["eval", SAMPLE, SAMPLE]).status.code(), Some(2));
}

#[test]
fn every_subcommand_documents_its_flags() {
    let commands = [
        "validate", "stats", "compare", "agree", "augment", "train", "finetune", "parse", "eval",
        "render",
    ];
    for command in commands {
        let out = scudkit(&[command, "--help"]);
        assert_eq!(out.status.code(), Some(0), "{command}");
        let help = stdout(&out);
        for flag in ["--tagset", "--format", "--jobs", "--seed", "--config"] {
            assert!(help.contains(flag), "{command} help lacks {flag}");
        }
    }
    let train = stdout(&scudkit(&["train", "--help"]));
    for flag in [
        "--hidden",
        "--max-epochs",
        "--embeddings",
        "--preset",
        "--grad-lanes",
    ] {
        assert!(train.contains(flag), "train help lacks {flag}");
    }
}

#[test]
fn augmentation_is_deterministic_and_seeded() {
    let dir = Scratch::new("augment");
    let input = dir.corpus("clean.conllu", 50, 4);
    let run = |extra: &[&str], jobs: &str| {
        let mut args = vec!["augment", "--rate", "0.3", "--jobs", jobs, &input];
        args.extend_from_slice(extra);
        let out = scudkit(&args);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        out.stdout
    };
    let a = run(&[], "1");
    assert_eq!(a, run(&[], "3"));
    assert_eq!(a, run(&["--seed", "42"], "2"));
    assert_ne!(a, run(&["--seed", "7"], "1"));
    assert_ne!(a, std::fs::read(&input).unwrap());

    let out = dir.path("noisy.conllu");
    assert_eq!(
        scudkit(&["augment", "--rate", "0.3", &input, &out])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(std::fs::read(&out).unwrap(), a);
    let validation = scudkit(&["validate", "--strict", &out]);
    assert_eq!(validation.status.code(), Some(0), "{}", stdout(&validation));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = Scratch::new("config");
    let input = dir.corpus("clean.conllu", 30, 5);
    let lexicon = dir.path("fillers.txt");
    std::fs::write(&lexicon, "hmm\n").unwrap();
    let conf = dir.path("run.conf");
    std::fs::write(
        &conf,
        "seed = 7\naugment.filler = 1.0\naugment.lexicon = fillers.txt\n",
    )
    .unwrap();
    let only_fillers = [
        "--word-split",
        "0",
        "--word-drop",
        "0",
        "--preterm-truncate",
        "0",
        "--stutter",
        "0",
        "--self-correct",
        "0",
    ];

    let mut args = vec!["augment", "--config", &conf, &input];
    args.extend_from_slice(&only_fillers);
    let from_file = scudkit(&args);
    assert_eq!(
        from_file.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&from_file.stderr)
    );
    let text = stdout(&from_file);
    assert_eq!(text.matches("\thmm\t").count(), 30);

    let mut seeded = args.clone();
    seeded.extend_from_slice(&["--seed", "7"]);
    assert_eq!(scudkit(&seeded).stdout, from_file.stdout);
    seeded.extend_from_slice(&["--filler", "0"]);
    assert_eq!(stdout(&scudkit(&seeded)).matches("\thmm\t").count(), 0);

    std::fs::write(&conf, "colour = red\n").unwrap();
    assert_eq!(
        scudkit(&["stats", "--config", &conf, &input]).status.code(),
        Some(2)
    );
}

#[test]
fn tagset_falls_back_to_the_environment() {
    let dir = Scratch::new("tagset");
    let tags = dir.path("small.tagset");
    std::fs::write(&tags, "root\npreterm\n").unwrap();
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_scudkit"));
        cmd.env_remove("SCUDKIT_TAGSET");
        if let Some(path) = env {
            cmd.env("SCUDKIT_TAGSET", path);
        }
        cmd.args(["validate", "--strict"]);
        if let Some(path) = flag {
            cmd.args(["--tagset", path]);
        }
        cmd.arg(SAMPLE).output().unwrap().status.code()
    };
    assert_eq!(run(None, None), Some(0));
    assert_eq!(run(Some(&tags), None), Some(1));
    assert_eq!(run(None, Some(&tags)), Some(1));
    let full = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/data/scud.tagset");
    assert_eq!(run(Some(&tags), Some(full)), Some(0));
}

#[test]
fn stats_and_compare_report_frequencies() {
    let dir = Scratch::new("stats");
    let a = dir.corpus("a.conllu", 40, 6);
    let tsv = stdout(&scudkit(&["stats", "--format", "tsv", "--top", "3", &a]));
    let lines: Vec<&str> = tsv.lines().collect();
    assert_eq!(lines[0], "relation\tcount\tpercent");
    assert_eq!(lines.len(), 4);
    let single = stdout(&scudkit(&["stats", "--format", "tsv", "--jobs", "1", &a]));
    let many = stdout(&scudkit(&["stats", "--format", "tsv", "--jobs", "4", &a]));
    assert_eq!(single, many);
    assert!(single.lines().any(|l| l.starts_with("root\t40\t")));

    let table = stdout(&scudkit(&["compare", "--top", "2", &a, SAMPLE]));
    assert!(table.starts_with("a "));
    assert!(table.contains("sample"));
    assert_eq!(table.lines().count(), 4);
}

#[test]
fn render_draws_the_selected_sentence() {
    let text = stdout(&scudkit(&["render", "--id", "sample-2", SAMPLE]));
    assert!(text.contains("└─ 2 have (root)"));
    let svg = scudkit(&["render", "--sentence", "2", "--svg", SAMPLE]);
    assert_eq!(svg.status.code(), Some(0));
    assert!(stdout(&svg).starts_with("<svg"));
    assert_eq!(
        scudkit(&["render", "--sentence", "99", SAMPLE])
            .status
            .code(),
        Some(2)
    );
}

fn tiny_flags(epochs: &str) -> Vec<&str> {
    vec![
        "--preset",
        "tiny",
        "--max-epochs",
        epochs,
        "--patience",
        epochs,
    ]
}

#[test]
fn train_parse_finetune_round_trip() {
    let dir = Scratch::new("pipeline");
    let train = dir.corpus("train.conllu", 40, 7);
    let dev = dir.corpus("dev.conllu", 10, 8);
    let model = dir.path("model.bin");
    let log = dir.path("train.tsv");
    let mut args = vec![
        "train", "--train", &train, "--dev", &dev, "-o", &model, "--log", &log,
    ];
    args.extend(tiny_flags("3"));
    let out = scudkit(&args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(stdout(&out).contains("best dev LAS"));
    assert_eq!(std::fs::read_to_string(&log).unwrap().lines().count(), 5);

    let parsed = dir.path("parsed.conllu");
    assert_eq!(
        scudkit(&["parse", "--model", &model, &dev, &parsed])
            .status
            .code(),
        Some(0)
    );
    let v = scudkit(&["validate", "--strict", "--rules", "R1,R2,R3", &parsed]);
    assert_eq!(v.status.code(), Some(0), "{}", stdout(&v));
    assert_eq!(read_file(&parsed).unwrap().len(), 10);
    let again = scudkit(&["parse", "--model", &model, &dev]);
    assert_eq!(again.stdout, std::fs::read(&parsed).unwrap());
    let scores = stdout(&scudkit(&["eval", &dev, &parsed]));
    assert_eq!(scores.split_whitespace().count(), 2);

    let raw = dir.path("raw.txt");
    std::fs::write(&raw, "i want a dog\n\nyes\n").unwrap();
    let from_text = stdout(&scudkit(&["parse", "--text", "--model", &model, &raw]));
    assert_eq!(from_text.matches("# sent_id").count(), 2);
    assert!(from_text.contains("1\tyes\t_\t_\t_\t_\t0\troot"));

    let tuned = dir.path("tuned.bin");
    let out = scudkit(&[
        "finetune",
        "--model",
        &model,
        "--train",
        &dev,
        "--dev",
        &dev,
        "-o",
        &tuned,
        "--max-epochs",
        "1",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(stdout(&out).contains("before  UAS"));
    let wider = scudkit(&[
        "finetune", "--model", &model, "--train", &dev, "--dev", &dev, "-o", &tuned, "--hidden",
        "99",
    ]);
    assert_eq!(wider.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&wider.stderr).contains("hidden"));
    assert_eq!(
        scudkit(&["parse", "--model", &train, &dev]).status.code(),
        Some(2)
    );
}
