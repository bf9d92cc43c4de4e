//! Gradient boosted regression trees for the logistic loss.
//!
//! Starts from the log-odds of the class prior. Each round fits a
//! squared-error tree to the residuals `y - p`, sets each leaf to the Newton
//! step `Σ r / Σ p(1-p)` and adds it scaled by the shrinkage. If a round
//! would increase the training loss its step is halved until it does not,
//! so the training loss never increases.

use serde::{Deserialize, Serialize};

use super::tree::{Builder, Criterion, Limits, Tree};
use super::{sigmoid, softplus, HyperParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtModel {
    pub init: f64,
    /// Leaf values already include shrinkage and any step halving.
    pub trees: Vec<Tree>,
}

impl GbtModel {
    pub fn raw_score(&self, x: &[f64]) -> f64 {
        self.init + self.trees.iter().map(|t| t.evaluate(x)).sum::<f64>()
    }

    pub fn probability(&self, x: &[f64]) -> f64 {
        sigmoid(self.raw_score(x))
    }
}

fn mean_loss(f: &[f64], ys: &[u8]) -> f64 {
    f.iter().zip(ys).map(|(&z, &y)| softplus(z) - f64::from(y) * z).sum::<f64>() / f.len() as f64
}

const MAX_HALVINGS: usize = 30;

pub(super) fn train(xs: &[&[f64]], ys: &[u8], h: &HyperParams) -> GbtModel {
    train_with_trace(xs, ys, h).0
}

/// Trains and also returns the mean training loss before the first round
/// and after every round.
pub fn train_with_trace(xs: &[&[f64]], ys: &[u8], h: &HyperParams) -> (GbtModel, Vec<f64>) {
    let n = xs.len();
    let dim = xs.first().map_or(0, |x| x.len());
    let prior = (ys.iter().map(|&y| f64::from(y)).sum::<f64>() / n as f64).clamp(1e-6, 1.0 - 1e-6);
    let init = (prior / (1.0 - prior)).ln();
    let shrinkage = h.get("shrinkage");
    let mut f = vec![init; n];
    let mut loss = mean_loss(&f, ys);
    let mut trace = vec![loss];
    let mut trees = Vec::new();
    for _ in 0..h.get_usize("rounds") {
        let p: Vec<f64> = f.iter().map(|&z| sigmoid(z)).collect();
        let residuals: Vec<f64> = ys.iter().zip(&p).map(|(&y, &pi)| f64::from(y) - pi).collect();
        let builder = Builder {
            xs,
            targets: &residuals,
            criterion: Criterion::SquaredError,
            limits: Limits {
                max_depth: h.get_usize("depth"),
                min_samples: h.get_usize("min_samples"),
            },
            features: (0..dim).collect(),
        };
        let newton = |rows: &[usize]| {
            let num: f64 = rows.iter().map(|&i| residuals[i]).sum();
            let den: f64 = rows.iter().map(|&i| p[i] * (1.0 - p[i])).sum();
            shrinkage * num / den.max(1e-12)
        };
        let mut tree = builder.build((0..n).collect(), &newton);
        let step: Vec<f64> = xs.iter().map(|x| tree.evaluate(x)).collect();
        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let cand: Vec<f64> = f.iter().zip(&step).map(|(a, s)| a + scale * s).collect();
            let l = mean_loss(&cand, ys);
            if l <= loss {
                accepted = Some((cand, l));
                break;
            }
            scale *= 0.5;
        }
        if let Some((cand, l)) = accepted {
            if scale != 1.0 {
                for node in &mut tree.nodes {
                    if let super::tree::Node::Leaf { value } = node {
                        *value *= scale;
                    }
                }
            }
            f = cand;
            loss = l;
            trees.push(tree);
        }
        trace.push(loss);
    }
    (GbtModel { init, trees }, trace)
}
