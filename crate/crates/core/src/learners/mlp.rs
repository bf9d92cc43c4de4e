//! One-hidden-layer perceptron: ReLU hidden units, sigmoid output,
//! cross-entropy loss, mini-batch gradient descent with momentum.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{dot, sigmoid, softplus, HyperParams};
use crate::seed::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    /// `hidden × dim`, row-major.
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
    pub dim: usize,
    pub hidden: usize,
}

impl MlpModel {
    fn hidden_pre(&self, x: &[f64]) -> Vec<f64> {
        (0..self.hidden)
            .map(|j| dot(&self.w1[j * self.dim..(j + 1) * self.dim], x) + self.b1[j])
            .collect()
    }

    /// Output logit.
    pub fn logit(&self, x: &[f64]) -> f64 {
        let h = self.hidden_pre(x);
        h.iter().zip(&self.w2).map(|(a, w)| a.max(0.0) * w).sum::<f64>() + self.b2
    }

    pub fn probability(&self, x: &[f64]) -> f64 {
        sigmoid(self.logit(x))
    }

    pub fn n_params(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + 1
    }

    /// Parameters in the order `w1, b1, w2, b2`.
    pub fn flatten(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.n_params());
        v.extend(&self.w1);
        v.extend(&self.b1);
        v.extend(&self.w2);
        v.push(self.b2);
        v
    }

    pub fn set_flat(&mut self, flat: &[f64]) {
        let (a, rest) = flat.split_at(self.w1.len());
        let (b, rest) = rest.split_at(self.b1.len());
        let (c, d) = rest.split_at(self.w2.len());
        self.w1.copy_from_slice(a);
        self.b1.copy_from_slice(b);
        self.w2.copy_from_slice(c);
        self.b2 = d[0];
    }

    /// He-uniform hidden weights, Glorot-uniform output weights, zero biases.
    pub fn init(dim: usize, hidden: usize, seed: u64) -> Self {
        let mut r = rng(seed);
        let a1 = (6.0 / dim.max(1) as f64).sqrt();
        let a2 = (6.0 / (hidden + 1) as f64).sqrt();
        let w1 = (0..hidden * dim).map(|_| r.random_range(-a1..a1)).collect();
        let w2 = (0..hidden).map(|_| r.random_range(-a2..a2)).collect();
        Self {
            w1,
            b1: vec![0.0; hidden],
            w2,
            b2: 0.0,
            dim,
            hidden,
        }
    }
}

/// Mean cross-entropy plus `l2/2 (‖w1‖² + ‖w2‖²)` over the given rows, and
/// its gradient in [`MlpModel::flatten`] order.
pub fn loss_and_gradient(model: &MlpModel, xs: &[&[f64]], ys: &[u8], l2: f64) -> (f64, Vec<f64>) {
    let (dim, hidden) = (model.dim, model.hidden);
    let n = xs.len() as f64;
    let mut g_w1 = vec![0.0; hidden * dim];
    let mut g_b1 = vec![0.0; hidden];
    let mut g_w2 = vec![0.0; hidden];
    let mut g_b2 = 0.0;
    let mut loss = 0.0;
    for (x, &y) in xs.iter().zip(ys) {
        let pre = model.hidden_pre(x);
        let act: Vec<f64> = pre.iter().map(|a| a.max(0.0)).collect();
        let z = dot(&act, &model.w2) + model.b2;
        let y = f64::from(y);
        loss += softplus(z) - y * z;
        let dz = sigmoid(z) - y;
        g_b2 += dz;
        for j in 0..hidden {
            g_w2[j] += dz * act[j];
            if pre[j] > 0.0 {
                let dh = dz * model.w2[j];
                g_b1[j] += dh;
                for (g, xi) in g_w1[j * dim..(j + 1) * dim].iter_mut().zip(x.iter()) {
                    *g += dh * xi;
                }
            }
        }
    }
    let sq: f64 = model.w1.iter().chain(&model.w2).map(|w| w * w).sum();
    let mut grad = Vec::with_capacity(model.n_params());
    grad.extend(g_w1.iter().zip(&model.w1).map(|(g, w)| g / n + l2 * w));
    grad.extend(g_b1.iter().map(|g| g / n));
    grad.extend(g_w2.iter().zip(&model.w2).map(|(g, w)| g / n + l2 * w));
    grad.push(g_b2 / n);
    (loss / n + 0.5 * l2 * sq, grad)
}

pub(super) fn train(xs: &[&[f64]], ys: &[u8], h: &HyperParams, seed: u64) -> MlpModel {
    let dim = xs.first().map_or(0, |x| x.len());
    let mut model = MlpModel::init(dim, h.get_usize("hidden"), seed);
    let lr = h.get("lr");
    let momentum = h.get("momentum");
    let l2 = h.get("l2");
    let batch = h.get_usize("batch");
    let mut shuffle_rng = rng(seed ^ 0x5eed_5eed);
    let mut order: Vec<usize> = (0..xs.len()).collect();
    let mut velocity = vec![0.0; model.n_params()];
    let mut theta = model.flatten();
    for _ in 0..h.get_usize("epochs") {
        order.shuffle(&mut shuffle_rng);
        for chunk in order.chunks(batch) {
            let bx: Vec<&[f64]> = chunk.iter().map(|&i| xs[i]).collect();
            let by: Vec<u8> = chunk.iter().map(|&i| ys[i]).collect();
            let (_, grad) = loss_and_gradient(&model, &bx, &by, l2);
            for ((t, v), g) in theta.iter_mut().zip(velocity.iter_mut()).zip(&grad) {
                *v = momentum * *v - lr * g;
                *t += *v;
            }
            model.set_flat(&theta);
        }
    }
    model
}
