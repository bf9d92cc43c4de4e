//! Linear soft-margin SVM trained with epoch-based stochastic subgradient
//! steps (Pegasos schedule).
//!
//! Minimizes `λ/2 ‖w‖² + 1/n Σ max(0, 1 - y_i (w·x_i + b))` with
//! `λ = 1 / (C n)` and labels mapped to ±1. The bias is handled as a weight on
//! a constant feature. Each epoch visits the rows in a seeded shuffled order;
//! the returned weights are the average of the iterates over the second half
//! of the steps.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{dot, HyperParams};
use crate::seed::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl SvmModel {
    pub fn margin(&self, x: &[f64]) -> f64 {
        dot(&self.weights, x) + self.bias
    }
}

pub(super) fn train(xs: &[&[f64]], ys: &[u8], h: &HyperParams, seed: u64) -> SvmModel {
    let n = xs.len();
    let dim = xs.first().map_or(0, |x| x.len());
    let lambda = 1.0 / (h.get("c") * n as f64);
    let epochs = h.get_usize("epochs");
    let total = epochs * n;
    let avg_from = total / 2 + 1;
    let mut rng = rng(seed);
    let mut order: Vec<usize> = (0..n).collect();
    // last slot is the bias
    let mut w = vec![0.0; dim + 1];
    let mut avg = vec![0.0; dim + 1];
    let mut n_avg = 0usize;
    let mut t = 0usize;
    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (lambda * t as f64);
            let y = if ys[i] == 1 { 1.0 } else { -1.0 };
            let x = xs[i];
            let m = y * (dot(&w[..dim], x) + w[dim]);
            let shrink = 1.0 - eta * lambda;
            w.iter_mut().for_each(|v| *v *= shrink);
            if m < 1.0 {
                for (wj, xj) in w.iter_mut().zip(x.iter()) {
                    *wj += eta * y * xj;
                }
                w[dim] += eta * y;
            }
            if t >= avg_from {
                n_avg += 1;
                let k = n_avg as f64;
                for (a, v) in avg.iter_mut().zip(&w) {
                    *a += (v - *a) / k;
                }
            }
        }
    }
    let bias = avg[dim];
    avg.truncate(dim);
    SvmModel { weights: avg, bias }
}
