//! Network parameters and the forward/backward pass for one sentence.

use std::collections::BTreeMap;

use ndarray::{concatenate, s, Array1, Array2, Array3, ArrayView1, ArrayView2, ArrayViewD, ArrayViewMutD, Axis};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use scud_core::{Sentence, Upos};

use crate::config::ParserConfig;
use crate::embeddings::{EmbeddingTable, Vocab, ROOT_ID};
use crate::nn::{dropout_mask, Dense, DenseTape, LstmDir, LstmTape};
use crate::Real;

/// POS rows: the 17 universal tags, then ROOT, then missing.
pub const POS_ROWS: usize = 19;
const POS_ROOT: usize = 17;
const POS_NONE: usize = 18;

pub fn pos_row(upos: Option<Upos>) -> usize {
    upos.map_or(POS_NONE, Upos::index)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LstmLayer<F> {
    pub fwd: LstmDir<F>,
    pub bwd: LstmDir<F>,
}

/// Every dense parameter except the embedding tables.
#[derive(Clone, Debug, PartialEq)]
pub struct Weights<F> {
    pub lstm: Vec<LstmLayer<F>>,
    pub arc_head: Dense<F>,
    pub arc_dep: Dense<F>,
    pub label_head: Dense<F>,
    pub label_dep: Dense<F>,
    /// `(A+1) × A`; the extra row is the head bias.
    pub arc_u: Array2<F>,
    /// `|R| × (B+1) × (B+1)`.
    pub label_u: Array3<F>,
}

impl<F: Real> Weights<F> {
    pub fn zeros(config: &ParserConfig, labels: usize) -> Self {
        let h = config.hidden;
        let lstm = (0..config.layers)
            .map(|l| {
                let inp = if l == 0 { config.embed_dim + config.pos_dim } else { 2 * h };
                LstmLayer {
                    fwd: LstmDir::zeros(inp, h),
                    bwd: LstmDir::zeros(inp, h),
                }
            })
            .collect();
        let (a, b) = (config.arc_dim, config.label_dim);
        Weights {
            lstm,
            arc_head: Dense::zeros(a, 2 * h),
            arc_dep: Dense::zeros(a, 2 * h),
            label_head: Dense::zeros(b, 2 * h),
            label_dep: Dense::zeros(b, 2 * h),
            arc_u: Array2::zeros((a + 1, a)),
            label_u: Array3::zeros((labels, b + 1, b + 1)),
        }
    }

    /// Named views in a fixed order.
    pub fn blocks(&self) -> Vec<(String, ArrayViewD<'_, F>)> {
        let mut out = Vec::new();
        for (l, layer) in self.lstm.iter().enumerate() {
            for (dir, d) in [("fwd", &layer.fwd), ("bwd", &layer.bwd)] {
                out.push((format!("lstm.{l}.{dir}.wx"), d.wx.view().into_dyn()));
                out.push((format!("lstm.{l}.{dir}.wh"), d.wh.view().into_dyn()));
                out.push((format!("lstm.{l}.{dir}.b"), d.b.view().into_dyn()));
            }
        }
        for (name, d) in [
            ("arc_head", &self.arc_head),
            ("arc_dep", &self.arc_dep),
            ("label_head", &self.label_head),
            ("label_dep", &self.label_dep),
        ] {
            out.push((format!("{name}.w"), d.w.view().into_dyn()));
            out.push((format!("{name}.b"), d.b.view().into_dyn()));
        }
        out.push(("arc_u".into(), self.arc_u.view().into_dyn()));
        out.push(("label_u".into(), self.label_u.view().into_dyn()));
        out
    }

    pub fn blocks_mut(&mut self) -> Vec<(String, ArrayViewMutD<'_, F>)> {
        let mut out = Vec::new();
        for (l, layer) in self.lstm.iter_mut().enumerate() {
            let LstmLayer { fwd, bwd } = layer;
            for (dir, d) in [("fwd", fwd), ("bwd", bwd)] {
                let LstmDir { wx, wh, b } = d;
                out.push((format!("lstm.{l}.{dir}.wx"), wx.view_mut().into_dyn()));
                out.push((format!("lstm.{l}.{dir}.wh"), wh.view_mut().into_dyn()));
                out.push((format!("lstm.{l}.{dir}.b"), b.view_mut().into_dyn()));
            }
        }
        let Weights {
            arc_head,
            arc_dep,
            label_head,
            label_dep,
            arc_u,
            label_u,
            ..
        } = self;
        for (name, d) in [
            ("arc_head", arc_head),
            ("arc_dep", arc_dep),
            ("label_head", label_head),
            ("label_dep", label_dep),
        ] {
            out.push((format!("{name}.w"), d.w.view_mut().into_dyn()));
            out.push((format!("{name}.b"), d.b.view_mut().into_dyn()));
        }
        out.push(("arc_u".into(), arc_u.view_mut().into_dyn()));
        out.push(("label_u".into(), label_u.view_mut().into_dyn()));
        out
    }

    pub fn add_assign(&mut self, other: &Weights<F>) {
        for ((_, mut a), (_, b)) in self.blocks_mut().into_iter().zip(other.blocks()) {
            a += &b;
        }
    }

    pub fn scale(&mut self, k: F) {
        for (_, mut a) in self.blocks_mut() {
            a.mapv_inplace(|v| v * k);
        }
    }

    pub fn squared_norm(&self) -> F {
        self.blocks().iter().map(|(_, a)| a.iter().map(|&v| v * v).sum::<F>()).sum()
    }
}

/// All trainable parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Params<F> {
    pub words: Array2<F>,
    pub pos: Option<Array2<F>>,
    pub weights: Weights<F>,
}

fn uniform<F: Real, R: Rng>(rng: &mut R, shape: (usize, usize), limit: f64) -> Array2<F> {
    Array2::from_shape_fn(shape, |_| F::from_f64(rng.random_range(-limit..=limit)))
}

impl<F: Real> Params<F> {
    /// Glorot-uniform encoder and projections, forget-gate bias 1, zero
    /// biaffine tensors, and random word rows except `<root>` (zero) and
    /// rows copied from `pretrained`.
    pub fn init<R: Rng>(
        config: &ParserConfig,
        vocab: &Vocab,
        labels: usize,
        pretrained: Option<&EmbeddingTable>,
        rng: &mut R,
    ) -> Self {
        let mut weights = Weights::<F>::zeros(config, labels);
        let glorot = |shape: (usize, usize)| (6.0 / (shape.0 + shape.1) as f64).sqrt();
        for layer in &mut weights.lstm {
            for dir in [&mut layer.fwd, &mut layer.bwd] {
                let h = dir.hidden_size();
                dir.wx = uniform(rng, dir.wx.dim(), glorot((h, dir.wx.ncols())));
                dir.wh = uniform(rng, dir.wh.dim(), glorot((h, h)));
                dir.b.slice_mut(s![h..2 * h]).fill(F::one());
            }
        }
        for d in [
            &mut weights.arc_head,
            &mut weights.arc_dep,
            &mut weights.label_head,
            &mut weights.label_dep,
        ] {
            d.w = uniform(rng, d.w.dim(), glorot(d.w.dim()));
        }
        let dim = config.embed_dim;
        let mut words: Array2<F> = uniform(rng, (vocab.len(), dim), (3.0 / dim as f64).sqrt());
        words.row_mut(ROOT_ID).fill(F::zero());
        if let Some(table) = pretrained {
            for (row, word) in table.vocab.words().iter().enumerate().skip(1) {
                let target = vocab.get(word).expect("pretrained words are in the vocabulary");
                words
                    .row_mut(target)
                    .assign(&table.matrix.row(row).mapv(|v| F::from_f64(v as f64)));
            }
        }
        let pos = (config.pos_dim > 0).then(|| uniform(rng, (POS_ROWS, config.pos_dim), (3.0 / config.pos_dim as f64).sqrt()));
        Params { words, pos, weights }
    }

    /// Named views, embeddings first.
    pub fn blocks(&self) -> Vec<(String, ArrayViewD<'_, F>)> {
        let mut out = vec![("words".to_owned(), self.words.view().into_dyn())];
        if let Some(p) = &self.pos {
            out.push(("pos".to_owned(), p.view().into_dyn()));
        }
        out.extend(self.weights.blocks());
        out
    }

    pub fn blocks_mut(&mut self) -> Vec<(String, ArrayViewMutD<'_, F>)> {
        let mut out = vec![("words".to_owned(), self.words.view_mut().into_dyn())];
        if let Some(p) = &mut self.pos {
            out.push(("pos".to_owned(), p.view_mut().into_dyn()));
        }
        out.extend(self.weights.blocks_mut());
        out
    }

    pub fn cast<G: Real>(&self) -> Params<G> {
        let mut out = Params {
            words: self.words.mapv(|v| G::from_f64(v.as_f64())),
            pos: self.pos.as_ref().map(|p| p.mapv(|v| G::from_f64(v.as_f64()))),
            weights: Weights::zeros_shaped(&self.weights),
        };
        for ((_, mut dst), (_, src)) in out.weights.blocks_mut().into_iter().zip(self.weights.blocks()) {
            dst.zip_mut_with(&src, |d, &s| *d = G::from_f64(s.as_f64()));
        }
        out
    }
}

impl<F: Real> Weights<F> {
    /// Zeros with the same shapes as `like`.
    pub fn zeros_shaped<G>(like: &Weights<G>) -> Self {
        let dir = |d: &LstmDir<G>| LstmDir {
            wx: Array2::zeros(d.wx.dim()),
            wh: Array2::zeros(d.wh.dim()),
            b: Array1::zeros(d.b.len()),
        };
        let dense = |d: &Dense<G>| Dense {
            w: Array2::zeros(d.w.dim()),
            b: Array1::zeros(d.b.len()),
        };
        Weights {
            lstm: like
                .lstm
                .iter()
                .map(|l| LstmLayer {
                    fwd: dir(&l.fwd),
                    bwd: dir(&l.bwd),
                })
                .collect(),
            arc_head: dense(&like.arc_head),
            arc_dep: dense(&like.arc_dep),
            label_head: dense(&like.label_head),
            label_dep: dense(&like.label_dep),
            arc_u: Array2::zeros(like.arc_u.dim()),
            label_u: Array3::zeros(like.label_u.dim()),
        }
    }
}

/// Gradients: sparse rows for the embedding tables, dense elsewhere.
#[derive(Clone, Debug, PartialEq)]
pub struct Grads<F> {
    pub words: BTreeMap<usize, Array1<F>>,
    pub pos: BTreeMap<usize, Array1<F>>,
    pub weights: Weights<F>,
}

impl<F: Real> Grads<F> {
    pub fn zeros(params: &Params<F>) -> Self {
        Grads {
            words: BTreeMap::new(),
            pos: BTreeMap::new(),
            weights: Weights::zeros_shaped(&params.weights),
        }
    }

    pub fn add_assign(&mut self, other: &Grads<F>) {
        for (rows, other_rows) in [(&mut self.words, &other.words), (&mut self.pos, &other.pos)] {
            for (&k, v) in other_rows {
                match rows.get_mut(&k) {
                    Some(row) => *row += v,
                    None => {
                        rows.insert(k, v.clone());
                    }
                }
            }
        }
        self.weights.add_assign(&other.weights);
    }

    pub fn scale(&mut self, k: F) {
        for row in self.words.values_mut().chain(self.pos.values_mut()) {
            row.mapv_inplace(|v| v * k);
        }
        self.weights.scale(k);
    }

    pub fn norm(&self) -> F {
        let sparse: F = self
            .words
            .values()
            .chain(self.pos.values())
            .map(|r| r.iter().map(|&v| v * v).sum::<F>())
            .sum();
        (sparse + self.weights.squared_norm()).sqrt()
    }
}

/// One sentence as network input. Position 0 is ROOT; `heads` and
/// `labels` (training only) are indexed by dependent position minus one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Example {
    pub words: Vec<usize>,
    pub pos: Vec<usize>,
    pub heads: Vec<usize>,
    pub labels: Vec<usize>,
}

impl Example {
    pub fn len(&self) -> usize {
        self.words.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Loss<F> {
    pub arc: F,
    pub label: F,
    pub tokens: usize,
}

struct Encoded<F> {
    /// `[arc head repr, 1] · U`, `T × A`.
    arc_proj: Array2<F>,
    arc_dep: Array2<F>,
    /// `[label head repr, 1]`, `T × (B+1)`.
    label_head1: Array2<F>,
    /// Per dependent (row `d-1`), `U_r · [label dep repr, 1]` flattened
    /// over `r`: `n × |R|(B+1)`.
    label_q: Array2<F>,
}

struct Tape<F> {
    inputs: Vec<Array2<F>>,
    input_mask: Option<Array2<F>>,
    lstm: Vec<(LstmTape<F>, LstmTape<F>, Option<Array2<F>>)>,
    top: Array2<F>,
    dense: [DenseTape<F>; 4],
    arc_head1: Array2<F>,
    label_dep1: Array2<F>,
}

fn with_ones<F: Real>(x: &Array2<F>) -> Array2<F> {
    concatenate![Axis(1), x.view(), Array2::ones((x.nrows(), 1))]
}

fn label_flat<F: Real>(u: &Array3<F>) -> ArrayView2<'_, F> {
    let (r, b1, _) = u.dim();
    u.view().into_shape_with_order((r * b1, b1)).expect("standard layout")
}

fn log_softmax_loss<F: Real>(logits: &[F], gold: usize, grad: &mut [F]) -> F {
    let max = logits.iter().copied().fold(F::neg_infinity(), F::max);
    let sum: F = logits.iter().map(|&v| (v - max).exp()).sum();
    let lse = max + sum.ln();
    for (g, &v) in grad.iter_mut().zip(logits) {
        *g = (v - lse).exp();
    }
    grad[gold] -= F::one();
    lse - logits[gold]
}

fn encode<F: Real>(
    params: &Params<F>,
    config: &ParserConfig,
    ex: &Example,
    mut rng: Option<&mut ChaCha8Rng>,
) -> (Encoded<F>, Tape<F>) {
    let t_len = ex.words.len();
    let p = config.dropout;
    let mut x = Array2::<F>::zeros((t_len, config.embed_dim + config.pos_dim));
    for (t, &w) in ex.words.iter().enumerate() {
        x.slice_mut(s![t, ..config.embed_dim]).assign(&params.words.row(w));
        if let Some(pos) = &params.pos {
            x.slice_mut(s![t, config.embed_dim..]).assign(&pos.row(ex.pos[t]));
        }
    }
    let input_mask = rng.as_deref_mut().map(|r| dropout_mask(r, x.dim(), p));
    if let Some(m) = &input_mask {
        x *= m;
    }
    let mut inputs = Vec::new();
    let mut lstm = Vec::new();
    for layer in &params.weights.lstm {
        let (hf, tf) = layer.fwd.forward(x.view(), false);
        let (hb, tb) = layer.bwd.forward(x.view(), true);
        let mut out = concatenate![Axis(1), hf, hb];
        let mask = rng.as_deref_mut().map(|r| dropout_mask(r, out.dim(), p));
        if let Some(m) = &mask {
            out *= m;
        }
        inputs.push(std::mem::replace(&mut x, out));
        lstm.push((tf, tb, mask));
    }
    let top = x;
    let w = &params.weights;
    let dense = |d: &Dense<F>, rng: Option<&mut ChaCha8Rng>| {
        let mask = rng.map(|r| dropout_mask(r, (t_len, d.w.nrows()), p));
        d.forward(top.view(), mask)
    };
    let (ha, t_ha) = dense(&w.arc_head, rng.as_deref_mut());
    let (da, t_da) = dense(&w.arc_dep, rng.as_deref_mut());
    let (hl, t_hl) = dense(&w.label_head, rng.as_deref_mut());
    let (dl, t_dl) = dense(&w.label_dep, rng.as_deref_mut());

    let arc_head1 = with_ones(&ha);
    let arc_proj = arc_head1.dot(&w.arc_u);
    let label_head1 = with_ones(&hl);
    let label_dep1 = with_ones(&dl);
    let label_q = label_dep1
        .slice(s![1.., ..])
        .dot(&label_flat(&w.label_u).t())
        .as_standard_layout()
        .into_owned();
    (
        Encoded {
            arc_proj,
            arc_dep: da,
            label_head1,
            label_q,
        },
        Tape {
            inputs,
            input_mask,
            lstm,
            top,
            dense: [t_ha, t_da, t_hl, t_dl],
            arc_head1,
            label_dep1,
        },
    )
}

impl<F: Real> Encoded<F> {
    /// `T × T` arc scores, entry `(h, d)`.
    fn arc_scores(&self) -> Array2<F> {
        self.arc_proj.dot(&self.arc_dep.t())
    }

    /// Label scores of dependent `d` (1-based) under head `h`.
    fn label_scores(&self, h: usize, d: usize, labels: usize) -> Array1<F> {
        let b1 = self.label_head1.ncols();
        let q = self.label_q.row(d - 1).into_shape_with_order((labels, b1)).expect("contiguous");
        q.dot(&self.label_head1.row(h))
    }
}

struct Objective<F> {
    loss: Loss<F>,
    d_scores: Array2<F>,
    d_label: Array2<F>,
}

/// Cross-entropy of the gold head over all other positions, plus that of
/// the gold label at the gold head, with gradients w.r.t. the scores.
fn objective<F: Real>(enc: &Encoded<F>, scores: &Array2<F>, ex: &Example, labels: usize) -> Objective<F> {
    let t_len = ex.words.len();
    let n = t_len - 1;
    let mut d_scores = Array2::<F>::zeros((t_len, t_len));
    let mut arc = F::zero();
    let mut logits = Vec::with_capacity(t_len);
    let mut g = vec![F::zero(); t_len - 1];
    for d in 1..t_len {
        logits.clear();
        logits.extend((0..t_len).filter(|&h| h != d).map(|h| scores[[h, d]]));
        let gold = ex.heads[d - 1];
        let gold_slot = if gold < d { gold } else { gold - 1 };
        arc += log_softmax_loss(&logits, gold_slot, &mut g);
        for (slot, h) in (0..t_len).filter(|&h| h != d).enumerate() {
            d_scores[[h, d]] = g[slot];
        }
    }
    let mut label = F::zero();
    let mut d_label = Array2::<F>::zeros((n, labels));
    let mut row = vec![F::zero(); labels];
    for d in 1..t_len {
        let s = enc.label_scores(ex.heads[d - 1], d, labels);
        label += log_softmax_loss(s.as_slice().expect("contiguous"), ex.labels[d - 1], &mut row);
        d_label.row_mut(d - 1).assign(&ArrayView1::from(&row[..]));
    }
    Objective {
        loss: Loss { arc, label, tokens: n },
        d_scores,
        d_label,
    }
}

/// Summed loss of gold heads and labels. With `rng`, dropout is applied;
/// with `grads`, gradients are accumulated.
pub fn loss_and_grads<F: Real>(
    params: &Params<F>,
    config: &ParserConfig,
    ex: &Example,
    rng: Option<&mut ChaCha8Rng>,
    grads: Option<&mut Grads<F>>,
) -> Loss<F> {
    let labels = params.weights.label_u.dim().0;
    let (enc, tape) = encode(params, config, ex, rng);
    let scores = enc.arc_scores();
    let obj = objective(&enc, &scores, ex, labels);
    if let Some(grads) = grads {
        backward(params, config, ex, &enc, &tape, &obj.d_scores, &obj.d_label, grads);
    }
    obj.loss
}

#[allow(clippy::too_many_arguments)]
fn backward<F: Real>(
    params: &Params<F>,
    config: &ParserConfig,
    ex: &Example,
    enc: &Encoded<F>,
    tape: &Tape<F>,
    d_scores: &Array2<F>,
    d_label: &Array2<F>,
    grads: &mut Grads<F>,
) {
    let w = &params.weights;
    let gw = &mut grads.weights;
    let t_len = ex.words.len();
    let (labels, b1, _) = w.label_u.dim();
    let a = config.arc_dim;

    // Arc biaffine.
    let d_proj = d_scores.dot(&enc.arc_dep);
    let d_arc_dep = d_scores.t().dot(&enc.arc_proj);
    gw.arc_u += &tape.arc_head1.t().dot(&d_proj);
    let d_arc_head = d_proj.dot(&w.arc_u.t()).slice(s![.., ..a]).to_owned();

    // Label biaffine.
    let mut d_q = Array2::<F>::zeros(enc.label_q.dim());
    let mut d_label_head1 = Array2::<F>::zeros((t_len, b1));
    for d in 1..t_len {
        let h = ex.heads[d - 1];
        let g = d_label.row(d - 1);
        let q = enc.label_q.row(d - 1).into_shape_with_order((labels, b1)).expect("contiguous");
        let mut dh = d_label_head1.row_mut(h);
        dh += &g.dot(&q);
        let mut dq = d_q.row_mut(d - 1).into_shape_with_order((labels, b1)).expect("contiguous");
        let head = enc.label_head1.row(h);
        for r in 0..labels {
            dq.row_mut(r).scaled_add(g[r], &head);
        }
    }
    let dep_rows = tape.label_dep1.slice(s![1.., ..]);
    let d_flat = d_q.t().dot(&dep_rows);
    let mut gu = gw.label_u.view_mut().into_shape_with_order((labels * b1, b1)).expect("standard layout");
    gu += &d_flat;
    let mut d_label_dep = Array2::<F>::zeros((t_len, config.label_dim));
    let d_dep_rows = d_q.dot(&label_flat(&w.label_u));
    d_label_dep
        .slice_mut(s![1.., ..])
        .assign(&d_dep_rows.slice(s![.., ..config.label_dim]));
    let d_label_head = d_label_head1.slice(s![.., ..config.label_dim]).to_owned();

    // Projections.
    let top = tape.top.view();
    let mut d_top = w.arc_head.backward(top, &tape.dense[0], &d_arc_head, &mut gw.arc_head);
    d_top += &w.arc_dep.backward(top, &tape.dense[1], &d_arc_dep, &mut gw.arc_dep);
    d_top += &w.label_head.backward(top, &tape.dense[2], &d_label_head, &mut gw.label_head);
    d_top += &w.label_dep.backward(top, &tape.dense[3], &d_label_dep, &mut gw.label_dep);

    // Encoder.
    let h = config.hidden;
    let mut d_x = d_top;
    for (l, layer) in w.lstm.iter().enumerate().rev() {
        let (tf, tb, mask) = &tape.lstm[l];
        if let Some(m) = mask {
            d_x *= m;
        }
        let x = tape.inputs[l].view();
        let glayer = &mut gw.lstm[l];
        let mut d_in = layer.fwd.backward(x, tf, d_x.slice(s![.., ..h]), &mut glayer.fwd);
        d_in += &layer.bwd.backward(x, tb, d_x.slice(s![.., h..]), &mut glayer.bwd);
        d_x = d_in;
    }
    if let Some(m) = &tape.input_mask {
        d_x *= m;
    }
    let dim = config.embed_dim;
    for (t, &word) in ex.words.iter().enumerate() {
        let row = d_x.slice(s![t, ..dim]);
        match grads.words.get_mut(&word) {
            Some(g) => *g += &row,
            None => {
                grads.words.insert(word, row.to_owned());
            }
        }
        if params.pos.is_some() {
            let row = d_x.slice(s![t, dim..]);
            match grads.pos.get_mut(&ex.pos[t]) {
                Some(g) => *g += &row,
                None => {
                    grads.pos.insert(ex.pos[t], row.to_owned());
                }
            }
        }
    }
}

/// Arc scores of one sentence: `(n+1) × n`, entry `[h, d-1]` scores head
/// `h` (0 = ROOT) for dependent `d`. Self-attachments are `-inf`.
#[derive(Clone, Debug, PartialEq)]
pub struct ArcScores {
    pub scores: Array2<f32>,
}

impl ArcScores {
    pub fn len(&self) -> usize {
        self.scores.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Same scores in 64 bits, as `(n+1) × (n+1)` with column 0 unused.
    pub fn to_square(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        let mut out = vec![vec![f64::NEG_INFINITY; n + 1]; n + 1];
        for h in 0..=n {
            for d in 1..=n {
                out[h][d] = self.scores[[h, d - 1]] as f64;
            }
        }
        out
    }
}

/// Inference-mode scores: arcs plus a function that gives label scores
/// for any `(head, dependent)` pair.
pub struct Scored<F> {
    pub arcs: Array2<F>,
    enc: Encoded<F>,
    labels: usize,
}

impl<F: Real> Scored<F> {
    pub fn label_scores(&self, h: usize, d: usize) -> Array1<F> {
        self.enc.label_scores(h, d, self.labels)
    }

    /// Loss of the gold analysis in `ex` under these scores.
    pub fn gold_loss(&self, ex: &Example) -> Loss<F> {
        objective(&self.enc, &self.arcs, ex, self.labels).loss
    }
}

pub fn score<F: Real>(params: &Params<F>, config: &ParserConfig, ex: &Example) -> Scored<F> {
    let (enc, _) = encode(params, config, ex, None);
    let arcs = enc.arc_scores();
    Scored {
        arcs,
        enc,
        labels: params.weights.label_u.dim().0,
    }
}

/// A trained parser: configuration, vocabularies and parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub config: ParserConfig,
    pub vocab: Vocab,
    pub labels: Vec<String>,
    /// Rows `2..2 + pretrained_rows` of the word table came from a
    /// pretrained file.
    pub pretrained_rows: usize,
    pub params: Params<f32>,
}

impl Model {
    pub fn label_index(&self, name: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == name)
    }

    /// Input rows for the surface tokens of `s`; empty nodes are skipped.
    pub fn example(&self, s: &Sentence) -> Example {
        let surface: Vec<_> = s.surface().collect();
        let mut words = vec![ROOT_ID];
        words.extend(surface.iter().map(|t| self.vocab.lookup(&t.form)));
        let mut pos = vec![POS_ROOT];
        pos.extend(surface.iter().map(|t| pos_row(t.upos)));
        Example {
            words,
            pos,
            heads: Vec::new(),
            labels: Vec::new(),
        }
    }

    /// Inference-mode scores of the surface tokens: arc matrix and the
    /// full `(n+1) × n × |R|` label tensor.
    pub fn score_sentence(&self, s: &Sentence) -> (ArcScores, Array3<f32>) {
        let ex = self.example(s);
        let n = ex.len();
        let scored = score(&self.params, &self.config, &ex);
        let mut arcs = scored.arcs.slice(s![.., 1..]).to_owned();
        for d in 1..=n {
            arcs[[d, d - 1]] = f32::NEG_INFINITY;
        }
        let mut labels = Array3::zeros((n + 1, n, self.labels.len()));
        for h in 0..=n {
            for d in 1..=n {
                labels.slice_mut(s![h, d - 1, ..]).assign(&scored.label_scores(h, d));
            }
        }
        (ArcScores { scores: arcs }, labels)
    }
}
