//! Layers with hand-written backward passes.

use ndarray::{s, Array1, Array2, ArrayView2, Axis, Zip};
use rand::Rng;

use crate::Real;

pub const LEAK: f64 = 0.1;

fn sigmoid<F: Real>(x: F) -> F {
    F::one() / (F::one() + (-x).exp())
}

/// Inverted-dropout mask: entries are 0 or `1 / (1 - p)`.
pub fn dropout_mask<F: Real, R: Rng>(rng: &mut R, shape: (usize, usize), p: f64) -> Array2<F> {
    let keep = F::from_f64(1.0 / (1.0 - p));
    Array2::from_shape_fn(shape, |_| if rng.random::<f64>() < p { F::zero() } else { keep })
}

/// Affine map followed by leaky ReLU and optional dropout.
#[derive(Clone, Debug, PartialEq)]
pub struct Dense<F> {
    /// `out × in`.
    pub w: Array2<F>,
    pub b: Array1<F>,
}

pub struct DenseTape<F> {
    pre: Array2<F>,
    mask: Option<Array2<F>>,
}

impl<F: Real> Dense<F> {
    pub fn zeros(out: usize, inp: usize) -> Self {
        Dense {
            w: Array2::zeros((out, inp)),
            b: Array1::zeros(out),
        }
    }

    pub fn forward(&self, x: ArrayView2<F>, mask: Option<Array2<F>>) -> (Array2<F>, DenseTape<F>) {
        let pre = x.dot(&self.w.t()) + &self.b;
        let leak = F::from_f64(LEAK);
        let mut y = pre.mapv(|z| if z > F::zero() { z } else { leak * z });
        if let Some(m) = &mask {
            y *= m;
        }
        (y, DenseTape { pre, mask })
    }

    /// Accumulates parameter gradients into `grad` and returns the input
    /// gradient.
    pub fn backward(&self, x: ArrayView2<F>, tape: &DenseTape<F>, dy: &Array2<F>, grad: &mut Dense<F>) -> Array2<F> {
        let leak = F::from_f64(LEAK);
        let mut dz = dy.clone();
        if let Some(m) = &tape.mask {
            dz *= m;
        }
        Zip::from(&mut dz).and(&tape.pre).for_each(|d, &z| {
            if z <= F::zero() {
                *d *= leak;
            }
        });
        grad.w += &dz.t().dot(&x);
        grad.b += &dz.sum_axis(Axis(0));
        dz.dot(&self.w)
    }
}

/// One direction of an LSTM layer. Gate order in the stacked weights is
/// input, forget, candidate, output.
#[derive(Clone, Debug, PartialEq)]
pub struct LstmDir<F> {
    /// `4H × in`.
    pub wx: Array2<F>,
    /// `4H × H`.
    pub wh: Array2<F>,
    pub b: Array1<F>,
}

pub struct LstmTape<F> {
    reverse: bool,
    /// Post-activation gates per position, `T × 4H`.
    gates: Array2<F>,
    cells: Array2<F>,
    hidden: Array2<F>,
}

impl<F: Real> LstmDir<F> {
    pub fn zeros(inp: usize, h: usize) -> Self {
        LstmDir {
            wx: Array2::zeros((4 * h, inp)),
            wh: Array2::zeros((4 * h, h)),
            b: Array1::zeros(4 * h),
        }
    }

    pub fn hidden_size(&self) -> usize {
        self.wh.ncols()
    }

    fn order(t: usize, reverse: bool) -> Vec<usize> {
        if reverse {
            (0..t).rev().collect()
        } else {
            (0..t).collect()
        }
    }

    /// Runs over positions `0..T` (or `T..0` when `reverse`); returns the
    /// hidden state at every position.
    pub fn forward(&self, x: ArrayView2<F>, reverse: bool) -> (Array2<F>, LstmTape<F>) {
        let h = self.hidden_size();
        let t_len = x.nrows();
        let zx = x.dot(&self.wx.t()) + &self.b;
        let mut gates = Array2::zeros((t_len, 4 * h));
        let mut cells = Array2::zeros((t_len, h));
        let mut hidden = Array2::zeros((t_len, h));
        let mut h_prev = Array1::<F>::zeros(h);
        let mut c_prev = Array1::<F>::zeros(h);
        for t in Self::order(t_len, reverse) {
            let z = &zx.row(t) + &self.wh.dot(&h_prev);
            let mut g = gates.row_mut(t);
            for k in 0..4 * h {
                g[k] = if (2 * h..3 * h).contains(&k) { z[k].tanh() } else { sigmoid(z[k]) };
            }
            let (i, f, cand, o) = (g.slice(s![..h]), g.slice(s![h..2 * h]), g.slice(s![2 * h..3 * h]), g.slice(s![3 * h..]));
            let c = &f * &c_prev + &i * &cand;
            let hh = &o * &c.mapv(|v| v.tanh());
            cells.row_mut(t).assign(&c);
            hidden.row_mut(t).assign(&hh);
            h_prev = hh;
            c_prev = c;
        }
        (
            hidden.clone(),
            LstmTape {
                reverse,
                gates,
                cells,
                hidden,
            },
        )
    }

    /// Backpropagation through time; returns the input gradient.
    pub fn backward(&self, x: ArrayView2<F>, tape: &LstmTape<F>, dh_out: ArrayView2<F>, grad: &mut LstmDir<F>) -> Array2<F> {
        let h = self.hidden_size();
        let t_len = x.nrows();
        let one = F::one();
        let mut dz_all = Array2::<F>::zeros((t_len, 4 * h));
        let mut dh_next = Array1::<F>::zeros(h);
        let mut dc_next = Array1::<F>::zeros(h);
        let order = Self::order(t_len, tape.reverse);
        for (step, &t) in order.iter().enumerate().rev() {
            let prev = step.checked_sub(1).map(|p| order[p]);
            let g = tape.gates.row(t);
            let c = tape.cells.row(t);
            let dh = &dh_out.row(t) + &dh_next;
            let mut dz = dz_all.row_mut(t);
            for k in 0..h {
                let (i, f, cand, o) = (g[k], g[h + k], g[2 * h + k], g[3 * h + k]);
                let tc = c[k].tanh();
                let c_prev = prev.map_or(F::zero(), |p| tape.cells[[p, k]]);
                let dc = dh[k] * o * (one - tc * tc) + dc_next[k];
                dz[k] = dc * cand * i * (one - i);
                dz[h + k] = dc * c_prev * f * (one - f);
                dz[2 * h + k] = dc * i * (one - cand * cand);
                dz[3 * h + k] = dh[k] * tc * o * (one - o);
                dc_next[k] = dc * f;
            }
            let dz = dz_all.row(t);
            dh_next = self.wh.t().dot(&dz);
            if let Some(p) = prev {
                let hp = tape.hidden.row(p);
                let dz2 = dz.insert_axis(Axis(1));
                let hp2 = hp.insert_axis(Axis(0));
                grad.wh += &dz2.dot(&hp2);
            }
        }
        grad.wx += &dz_all.t().dot(&x);
        grad.b += &dz_all.sum_axis(Axis(0));
        dz_all.dot(&self.wx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random(rng: &mut ChaCha8Rng, shape: (usize, usize)) -> Array2<f64> {
        Array2::from_shape_fn(shape, |_| rng.random_range(-0.5..0.5))
    }

    #[test]
    fn dropout_mask_scales_kept_units() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m: Array2<f64> = dropout_mask(&mut rng, (50, 50), 0.25);
        assert!(m.iter().all(|&v| v == 0.0 || (v - 4.0 / 3.0).abs() < 1e-12));
        let dropped = m.iter().filter(|&&v| v == 0.0).count();
        assert!((400..850).contains(&dropped));
    }

    #[test]
    fn lstm_input_gradient_matches_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (inp, h, t) = (3, 2, 4);
        let dir = LstmDir {
            wx: random(&mut rng, (4 * h, inp)),
            wh: random(&mut rng, (4 * h, h)),
            b: Array1::from_shape_fn(4 * h, |_| rng.random_range(-0.5..0.5)),
        };
        let x = random(&mut rng, (t, inp));
        let weights = random(&mut rng, (t, h));
        for reverse in [false, true] {
            let loss = |x: &Array2<f64>| (dir.forward(x.view(), reverse).0 * &weights).sum();
            let (_, tape) = dir.forward(x.view(), reverse);
            let mut grad = LstmDir::zeros(inp, h);
            let dx = dir.backward(x.view(), &tape, weights.view(), &mut grad);
            for idx in [(0, 0), (1, 2), (3, 1)] {
                let mut xp = x.clone();
                xp[idx] += 1e-6;
                let mut xm = x.clone();
                xm[idx] -= 1e-6;
                let numeric = (loss(&xp) - loss(&xm)) / 2e-6;
                assert!((numeric - dx[idx]).abs() < 1e-7, "{reverse} {idx:?}");
            }
        }
    }
}
