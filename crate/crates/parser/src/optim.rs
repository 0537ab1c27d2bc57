//! Adam with global-norm clipping and lazy embedding-row updates.

use std::ops::Range;

use ndarray::{Array1, ArrayViewMut1, ArrayViewMutD};

use crate::config::ParserConfig;
use crate::model::{Grads, Params, Weights};

const EPS: f32 = 1e-12;

#[derive(Clone, Debug)]
pub struct Adam {
    lr: f32,
    beta1: f32,
    beta2: f32,
    clip: f32,
    step: i32,
    m: Params<f32>,
    v: Params<f32>,
}

struct Moments {
    lr_t: f32,
    beta1: f32,
    beta2: f32,
}

impl Moments {
    fn update(&self, mut p: ArrayViewMut1<f32>, mut m: ArrayViewMut1<f32>, mut v: ArrayViewMut1<f32>, g: &Array1<f32>, scale: f32) {
        for i in 0..g.len() {
            let gi = g[i] * scale;
            m[i] = self.beta1 * m[i] + (1.0 - self.beta1) * gi;
            v[i] = self.beta2 * v[i] + (1.0 - self.beta2) * gi * gi;
            p[i] -= self.lr_t * m[i] / (v[i].sqrt() + EPS);
        }
    }
}

fn flat(a: ArrayViewMutD<'_, f32>) -> ArrayViewMut1<'_, f32> {
    let len = a.len();
    a.into_shape_with_order(len).expect("standard layout")
}

impl Adam {
    pub fn new(params: &Params<f32>, config: &ParserConfig) -> Self {
        let zeros = || Params {
            words: ndarray::Array2::zeros(params.words.dim()),
            pos: params.pos.as_ref().map(|p| ndarray::Array2::zeros(p.dim())),
            weights: Weights::zeros_shaped(&params.weights),
        };
        Adam {
            lr: config.learning_rate as f32,
            beta1: config.beta1 as f32,
            beta2: config.beta2 as f32,
            clip: config.clip as f32,
            step: 0,
            m: zeros(),
            v: zeros(),
        }
    }

    /// One update. Word rows in `frozen` are left untouched; embedding
    /// rows without a gradient keep their moments.
    pub fn step(&mut self, params: &mut Params<f32>, grads: &Grads<f32>, frozen: Range<usize>) {
        self.step += 1;
        let norm = grads.norm();
        let scale = if norm > self.clip { self.clip / norm } else { 1.0 };
        let bias1 = 1.0 - self.beta1.powi(self.step);
        let bias2 = 1.0 - self.beta2.powi(self.step);
        let moments = Moments {
            lr_t: self.lr * bias2.sqrt() / bias1,
            beta1: self.beta1,
            beta2: self.beta2,
        };
        for (&row, g) in &grads.words {
            if !frozen.contains(&row) {
                moments.update(params.words.row_mut(row), self.m.words.row_mut(row), self.v.words.row_mut(row), g, scale);
            }
        }
        if let (Some(p), Some(m), Some(v)) = (&mut params.pos, &mut self.m.pos, &mut self.v.pos) {
            for (&row, g) in &grads.pos {
                moments.update(p.row_mut(row), m.row_mut(row), v.row_mut(row), g, scale);
            }
        }
        let blocks = params
            .weights
            .blocks_mut()
            .into_iter()
            .zip(self.m.weights.blocks_mut())
            .zip(self.v.weights.blocks_mut())
            .zip(grads.weights.blocks());
        for ((((_, p), (_, m)), (_, v)), (_, g)) in blocks {
            let g = g.iter().copied().collect::<Array1<f32>>();
            moments.update(flat(p), flat(m), flat(v), &g, scale);
        }
    }
}
