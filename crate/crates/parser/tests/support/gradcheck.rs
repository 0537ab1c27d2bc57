//! Finite-difference check shared by the gradient tests and the
//! acceptance harness.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scud_parser::embeddings::Vocab;
use scud_parser::model::{loss_and_grads, Example, Grads, Params};
use scud_parser::ParserConfig;

const STEP: f64 = 1e-5;
const LABELS: usize = 3;

fn random_params(config: &ParserConfig, seed: u64) -> Params<f64> {
    let vocab = Vocab::from_words(["<root>", "<unk>", "a", "b", "c"]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = Params::<f64>::init(config, &vocab, LABELS, None, &mut rng);
    for (_, mut block) in p.blocks_mut() {
        block.mapv_inplace(|_| rng.random_range(-0.8..0.8));
    }
    p
}

fn examples() -> Vec<Example> {
    vec![
        Example {
            words: vec![0, 2],
            pos: vec![17, 3],
            heads: vec![0],
            labels: vec![1],
        },
        Example {
            words: vec![0, 3, 2],
            pos: vec![17, 0, 5],
            heads: vec![2, 0],
            labels: vec![2, 0],
        },
        Example {
            words: vec![0, 4, 2, 4],
            pos: vec![17, 1, 18, 1],
            heads: vec![2, 0, 2],
            labels: vec![1, 0, 2],
        },
    ]
}

fn total_loss(p: &Params<f64>, config: &ParserConfig, ex: &Example, dropout: Option<u64>) -> f64 {
    let mut rng = dropout.map(ChaCha8Rng::seed_from_u64);
    let l = loss_and_grads(p, config, ex, rng.as_mut(), None);
    l.arc + l.label
}

/// Dense view of the analytic gradient for block `name`.
fn analytic(grads: &Grads<f64>, params: &Params<f64>, name: &str) -> Vec<f64> {
    match name {
        "words" | "pos" => {
            let (rows, sparse) = if name == "words" {
                (&params.words, &grads.words)
            } else {
                (params.pos.as_ref().unwrap(), &grads.pos)
            };
            let mut out = vec![0.0; rows.len()];
            for (&r, g) in sparse {
                for (c, &v) in g.iter().enumerate() {
                    out[r * rows.ncols() + c] = v;
                }
            }
            out
        }
        _ => grads
            .weights
            .blocks()
            .into_iter()
            .find(|(n, _)| n == name)
            .unwrap()
            .1
            .iter()
            .copied()
            .collect(),
    }
}

/// Largest relative error between analytic and central-difference
/// gradients over every element of every block, with the block it
/// occurred in. Fails if some block never receives a gradient.
pub fn max_relative_error(config: &ParserConfig, dropout: Option<u64>) -> Result<(f64, String), String> {
    let params = random_params(config, 7);
    let names: Vec<String> = params.blocks().into_iter().map(|(n, _)| n).collect();
    let mut worst = (0.0, String::new());
    let mut live = std::collections::BTreeMap::<String, usize>::new();
    for ex in examples() {
        let mut grads = Grads::zeros(&params);
        let mut rng = dropout.map(ChaCha8Rng::seed_from_u64);
        loss_and_grads(&params, config, &ex, rng.as_mut(), Some(&mut grads));
        for name in &names {
            let exact = analytic(&grads, &params, name);
            *live.entry(name.clone()).or_default() += exact.iter().filter(|v| v.abs() > 1e-7).count();
            for (k, &a) in exact.iter().enumerate() {
                let nudge = |delta: f64| {
                    let mut p = params.clone();
                    for (n, mut block) in p.blocks_mut() {
                        if &n == name {
                            let cell = block.iter_mut().nth(k).unwrap();
                            *cell += delta;
                        }
                    }
                    total_loss(&p, config, &ex, dropout)
                };
                let numeric = (nudge(STEP) - nudge(-STEP)) / (2.0 * STEP);
                let scale = a.abs().max(numeric.abs());
                let error = if scale < 1e-7 { 0.0 } else { (a - numeric).abs() / scale };
                if error > worst.0 {
                    worst = (error, format!("{name}[{k}] ({a:.3e} vs {numeric:.3e})"));
                }
            }
        }
    }
    // Guard against a vacuous pass on all-zero gradients.
    if let Some((name, _)) = live.iter().find(|(_, &count)| count == 0) {
        return Err(format!("{name}: gradient is identically zero"));
    }
    Ok(worst)
}

/// Tiny network with every block present.
pub fn tiny(layers: usize) -> ParserConfig {
    ParserConfig {
        embed_dim: 4,
        pos_dim: 4,
        hidden: 4,
        layers,
        arc_dim: 4,
        label_dim: 4,
        dropout: 0.25,
        ..Default::default()
    }
}
