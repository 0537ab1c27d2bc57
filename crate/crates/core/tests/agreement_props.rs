use proptest::prelude::*;
use rand::seq::index::sample;
use rand::Rng;
use scud_core::agreement::{attachment_agreement, AgreementOptions};
use scud_core::augment::{augment_corpus, sentence_rng, AugmentConfig};
use scud_core::synth::generate_corpus;
use scud_core::{Head, Relation, Sentence};

fn corpus(seed: u64) -> Vec<Sentence> {
    augment_corpus(&generate_corpus(60, seed, "g"), &AugmentConfig::uniform(0.2, seed)).unwrap()
}

/// Positions of every attached node as (sentence, token).
fn attached(c: &[Sentence]) -> Vec<(usize, usize)> {
    c.iter()
        .enumerate()
        .flat_map(|(i, s)| s.tokens.iter().enumerate().filter(|(_, t)| t.is_attached()).map(move |(j, _)| (i, j)))
        .collect()
}

/// Moves the node's head somewhere else while keeping it attached.
fn move_head(s: &mut Sentence, j: usize, r: &mut impl Rng) {
    let own = s.tokens[j].id;
    let current = s.tokens[j].head;
    let mut options: Vec<Head> = s.tokens.iter().map(|t| t.id).filter(|&id| id != own).map(Head::Node).collect();
    options.push(Head::Root);
    options.retain(|&h| h != current);
    s.tokens[j].head = options[r.random_range(0..options.len())];
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn perturbing_k_heads_is_exact(seed in 0u64..1000, frac in 0.0f64..1.0) {
        let a = corpus(seed);
        let sites = attached(&a);
        let n = sites.len();
        let k = (frac * n as f64) as usize;
        let mut rng = sentence_rng(seed, 1);
        let mut b = a.clone();
        for p in sample(&mut rng, n, k) {
            let (i, j) = sites[p];
            if b[i].tokens.len() > 1 {
                move_head(&mut b[i], j, &mut rng);
            }
        }
        let changed = a.iter().zip(&b).flat_map(|(x, y)| x.tokens.iter().zip(&y.tokens)).filter(|(l, r)| l.head != r.head).count();
        let r = attachment_agreement(&a, &b, AgreementOptions::default()).unwrap();
        prop_assert_eq!(r.token_count, n);
        prop_assert_eq!(r.unlabeled_pct, 100.0 * (n - changed) as f64 / n as f64);
        prop_assert!(r.labeled_pct <= r.unlabeled_pct);
        prop_assert_eq!(attachment_agreement(&b, &a, AgreementOptions::default()).unwrap(), r);
    }

    #[test]
    fn label_changes_leave_unlabeled_alone(seed in 0u64..1000, k in 1usize..20) {
        let a = corpus(seed);
        let sites = attached(&a);
        let mut b = a.clone();
        let mut rng = sentence_rng(seed, 2);
        for p in sample(&mut rng, sites.len(), k.min(sites.len())) {
            let (i, j) = sites[p];
            b[i].tokens[j].deprel = Some(Relation::new("zzz"));
        }
        let r = attachment_agreement(&a, &b, AgreementOptions::default()).unwrap();
        prop_assert_eq!(r.unlabeled_pct, 100.0);
        let n = sites.len();
        prop_assert_eq!(r.labeled_pct, 100.0 * (n - k.min(n)) as f64 / n as f64);
    }
}

#[test]
fn identical_corpora_agree_fully() {
    let a = corpus(3);
    let r = attachment_agreement(&a, &a, AgreementOptions::default()).unwrap();
    assert_eq!((r.unlabeled_pct, r.labeled_pct), (100.0, 100.0));
    assert_eq!(format!("{:.1} {:.1}", r.unlabeled_pct, r.labeled_pct), "100.0 100.0");
}

#[test]
fn first_divergence_is_located() {
    let a = corpus(4);
    let mut b = a.clone();
    b[7].tokens[0].form.push('x');
    b[9].tokens[0].form.push('x');
    let err = attachment_agreement(&a, &b, AgreementOptions::default()).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("sentence 8"), "{msg}");
    assert!(msg.contains(&b[7].tokens[0].id.to_string()));
}
