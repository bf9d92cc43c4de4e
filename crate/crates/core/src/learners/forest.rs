//! Random forest: bootstrap-sampled CART trees, each restricted to its own
//! random feature subset. Trees are grown in parallel from per-tree seeds,
//! so the result does not depend on scheduling.

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{train_classifier_on, Limits, Tree};
use super::HyperParams;
use crate::seed::{derive_seed, rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<Tree>,
}

impl ForestModel {
    /// Fraction of trees voting for class 1.
    pub fn vote_fraction(&self, x: &[f64]) -> f64 {
        let votes = self.trees.iter().filter(|t| t.evaluate(x) >= 0.5).count();
        votes as f64 / self.trees.len() as f64
    }
}

pub(super) fn train(xs: &[&[f64]], ys: &[u8], h: &HyperParams, seed: u64) -> ForestModel {
    let n = xs.len();
    let dim = xs.first().map_or(0, |x| x.len());
    let n_trees = h.get_usize("trees");
    let max_features = match h.get_usize("max_features") {
        0 => ((dim as f64).sqrt().floor() as usize).max(1),
        k => k.min(dim),
    };
    let trees = (0..n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng(derive_seed(seed, "rforest-tree", t as u64));
            let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            let mut features = sample(&mut rng, dim, max_features).into_vec();
            features.sort_unstable();
            train_classifier_on(
                xs,
                ys,
                rows,
                Limits {
                    max_depth: h.get_usize("max_depth"),
                    min_samples: h.get_usize("min_samples"),
                },
                features,
            )
        })
        .collect();
    ForestModel { trees }
}
