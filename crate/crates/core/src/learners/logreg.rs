//! L2-regularized logistic regression fitted by full-batch gradient descent.
//!
//! Objective, with `z = w·x + b`:
//!
//! ```text
//! J(w, b) = 1/n Σ [softplus(z_i) - y_i z_i] + λ/2 ‖w‖²
//! ```
//!
//! The bias is not regularized. Iteration stops once the gradient norm is at
//! most `tol` or after `max_iter` steps.

use serde::{Deserialize, Serialize};

use super::{dot, sigmoid, softplus, HyperParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogregModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LogregModel {
    pub fn probability(&self, x: &[f64]) -> f64 {
        sigmoid(dot(&self.weights, x) + self.bias)
    }
}

/// Objective value and its gradient `(∂J/∂w, ∂J/∂b)`.
pub fn objective_and_gradient(w: &[f64], b: f64, xs: &[&[f64]], ys: &[u8], lambda: f64) -> (f64, Vec<f64>, f64) {
    let n = xs.len() as f64;
    let mut loss = 0.0;
    let mut gw = vec![0.0; w.len()];
    let mut gb = 0.0;
    for (x, &y) in xs.iter().zip(ys) {
        let z = dot(w, x) + b;
        let y = f64::from(y);
        loss += softplus(z) - y * z;
        let r = sigmoid(z) - y;
        for (g, xi) in gw.iter_mut().zip(x.iter()) {
            *g += r * xi;
        }
        gb += r;
    }
    let reg: f64 = w.iter().map(|v| v * v).sum::<f64>();
    for (g, wi) in gw.iter_mut().zip(w) {
        *g = *g / n + lambda * wi;
    }
    (loss / n + 0.5 * lambda * reg, gw, gb / n)
}

pub(super) fn train(xs: &[&[f64]], ys: &[u8], h: &HyperParams) -> LogregModel {
    let dim = xs.first().map_or(0, |x| x.len());
    let lambda = h.get("lambda");
    let lr = h.get("lr");
    let tol = h.get("tol");
    let max_iter = h.get_usize("max_iter");
    let mut w = vec![0.0; dim];
    let mut b = 0.0;
    for _ in 0..max_iter {
        let (_, gw, gb) = objective_and_gradient(&w, b, xs, ys, lambda);
        let norm = (gw.iter().map(|g| g * g).sum::<f64>() + gb * gb).sqrt();
        if norm <= tol {
            break;
        }
        for (wi, g) in w.iter_mut().zip(&gw) {
            *wi -= lr * g;
        }
        b -= lr * gb;
    }
    LogregModel { weights: w, bias: b }
}
