use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::learners::FeatureMatrix;
use crate::seed::rng;

/// Assignment of every row to one of `k` folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    pub stratified: bool,
    /// `(review_id, fold)` in feature-matrix row order.
    pub assignments: Vec<(String, usize)>,
}

impl FoldPlan {
    pub fn fold_of_row(&self, row: usize) -> usize {
        self.assignments[row].1
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for (_, f) in &self.assignments {
            sizes[*f] += 1;
        }
        sizes
    }

    /// Row indices of the training and held-out parts of fold `i`.
    pub fn split(&self, i: usize) -> (Vec<usize>, Vec<usize>) {
        (0..self.assignments.len()).partition(|&r| self.assignments[r].1 != i)
    }

    pub fn covers(&self, m: &FeatureMatrix) -> bool {
        self.assignments.len() == m.len() && self.assignments.iter().zip(m.rows()).all(|((id, _), r)| *id == r.id)
    }
}

/// Seeded shuffle, then round-robin over folds. When stratified each class
/// is dealt in turn (class 0 first) and the second class continues where the
/// first stopped, so both fold sizes and per-class counts differ by at most 1.
pub fn make_folds(m: &FeatureMatrix, k: usize, seed: u64, stratified: bool) -> Result<FoldPlan, EvalError> {
    if k < 2 {
        return Err(EvalError::KTooSmall(k));
    }
    if m.len() < k {
        return Err(EvalError::TooFewRows { rows: m.len(), k });
    }
    let mut order: Vec<usize> = (0..m.len()).collect();
    order.shuffle(&mut rng(seed));
    let mut fold = vec![0usize; m.len()];
    let groups: Vec<Vec<usize>> = if stratified {
        (0..=1u8)
            .map(|c| order.iter().copied().filter(|&i| m.rows()[i].y == c).collect())
            .collect()
    } else {
        vec![order]
    };
    let mut next = 0usize;
    for group in groups {
        for i in group {
            fold[i] = next % k;
            next += 1;
        }
    }
    Ok(FoldPlan {
        k,
        seed,
        stratified,
        assignments: m.rows().iter().zip(fold).map(|(r, f)| (r.id.clone(), f)).collect(),
    })
}
