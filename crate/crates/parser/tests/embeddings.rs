use scud_core::synth::generate_corpus;
use scud_core::Tagset;
use scud_parser::embeddings::{EmbeddingError, UNK_ID};
use scud_parser::{load_embeddings, train, EmbeddingTable, ParserConfig};

fn write_file(name: &str, text: &str) -> std::path::PathBuf {
    let path = std::env::temp_dir().join(format!("scud-emb-{}-{name}", std::process::id()));
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn unk_row_is_the_mean_of_loaded_rows() {
    let text = "the 0.5 1 -2\ncat 1.5 0 4\nsat -1 2 1\n";
    let table = load_embeddings(write_file("mean", text), 3).unwrap();
    let rows: Vec<Vec<f32>> = text
        .lines()
        .map(|l| l.split(' ').skip(1).map(|v| v.parse().unwrap()).collect())
        .collect();
    for c in 0..3 {
        let mean = rows.iter().map(|r| r[c]).sum::<f32>() / 3.0;
        assert!((table.matrix[[UNK_ID, c]] - mean).abs() < 1e-6);
    }
    assert_eq!(table.matrix.nrows(), 5);
}

#[test]
fn dimension_errors_carry_line_numbers() {
    let path = write_file("bad", "a 1 2\nb 1 2\nc 1\n");
    match load_embeddings(path, 2) {
        Err(EmbeddingError::Dimension { line, .. }) => assert_eq!(line, 3),
        other => panic!("{other:?}"),
    }
    assert!(matches!(
        load_embeddings("/nonexistent/vectors.txt", 2),
        Err(EmbeddingError::Io { .. })
    ));
}

#[test]
fn frozen_pretrained_rows_do_not_move() {
    let corpus = generate_corpus(20, 2, "e");
    let dim = 16;
    let mut text = String::new();
    for (k, w) in ["the", "dog", "cat", "absent"].iter().enumerate() {
        let values: Vec<String> = (0..dim).map(|i| format!("{}", (k * dim + i) as f32 / 100.0)).collect();
        text.push_str(&format!("{w} {}\n", values.join(" ")));
    }
    let table = EmbeddingTable::parse(&text, dim).unwrap();
    let config = ParserConfig {
        max_epochs: 2,
        freeze_pretrained: true,
        ..ParserConfig::tiny()
    };
    let (model, _) = train(&corpus, &corpus, Some(&table), &Tagset::scud(), &config).unwrap();
    assert_eq!(model.pretrained_rows, 4);
    for w in ["the", "dog", "cat", "absent"] {
        let row = model.vocab.get(w).unwrap();
        assert_eq!(model.params.words.row(row), table.matrix.row(table.vocab.get(w).unwrap()));
    }
    let wrong = ParserConfig {
        embed_dim: 8,
        ..config
    };
    assert!(train(&corpus, &corpus, Some(&table), &Tagset::scud(), &wrong).is_err());
}
