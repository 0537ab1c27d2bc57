use scud_core::synth::generate_corpus;
use scud_core::Tagset;
use scud_parser::checkpoint::{from_bytes, to_bytes};
use scud_parser::{train, CheckpointError, Model, ParserConfig};

fn small_model() -> Model {
    let corpus = generate_corpus(10, 3, "k");
    let config = ParserConfig {
        embed_dim: 4,
        hidden: 4,
        layers: 1,
        arc_dim: 4,
        label_dim: 4,
        max_epochs: 1,
        ..Default::default()
    };
    train(&corpus, &corpus, None, &Tagset::scud(), &config).unwrap().0
}

#[test]
fn every_truncation_is_rejected() {
    let bytes = to_bytes(&small_model());
    for len in 0..bytes.len() {
        match from_bytes(&bytes[..len]) {
            Err(CheckpointError::Truncated) => {}
            other => panic!("prefix {len}: {other:?}"),
        }
    }
}

#[test]
fn every_flipped_byte_is_rejected() {
    let bytes = to_bytes(&small_model());
    for i in 0..bytes.len() {
        let mut corrupt = bytes.clone();
        corrupt[i] ^= 0x5a;
        assert!(from_bytes(&corrupt).is_err(), "byte {i}");
    }
}

#[test]
fn header_errors_are_distinct() {
    let bytes = to_bytes(&small_model());
    let mut wrong = bytes.clone();
    wrong[0] = b'X';
    assert!(matches!(from_bytes(&wrong), Err(CheckpointError::BadMagic)));
    let mut newer = bytes.clone();
    newer[9..13].copy_from_slice(&2u32.to_le_bytes());
    assert!(matches!(from_bytes(&newer), Err(CheckpointError::UnsupportedVersion(2))));
    let mut trailing = bytes.clone();
    trailing.push(0);
    assert!(matches!(from_bytes(&trailing), Err(CheckpointError::Malformed(_))));
    let mut payload = bytes.clone();
    let last_value = payload.len() - 5;
    payload[last_value] ^= 1;
    assert!(matches!(from_bytes(&payload), Err(CheckpointError::ChecksumMismatch)));
}

#[test]
fn shape_mismatch_names_the_block() {
    let bytes = to_bytes(&small_model());
    let name = b"\x05\0\0\0arc_u";
    let at = bytes.windows(name.len()).position(|w| w == name).unwrap() + name.len();
    let mut bad = bytes.clone();
    // rank, then the first dimension
    bad[at + 4..at + 12].copy_from_slice(&4u64.to_le_bytes());
    match from_bytes(&bad) {
        Err(CheckpointError::ShapeMismatch { block, expected, found }) => {
            assert_eq!(block, "arc_u");
            assert_eq!(expected, [5, 4]);
            assert_eq!(found, [4, 4]);
        }
        other => panic!("{other:?}"),
    }
}
