use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{compute_metrics, ConfusionMatrix, MetricsReport};
use super::{EvalError, FoldPlan};
use crate::learners::{predict, train, FeatureMatrix, HyperParams};
use crate::seed::derive_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeldOutPrediction {
    pub id: String,
    pub fold: usize,
    pub truth: u8,
    pub label: u8,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvOutcome {
    pub report: MetricsReport,
    /// In feature-matrix row order.
    pub predictions: Vec<HeldOutPrediction>,
}

/// k-fold cross-validation. Each fold trains on the other folds (feature
/// standardization is fitted inside `train`, so only on training rows) with
/// a seed derived from the plan seed and the fold index.
pub fn cross_validate(m: &FeatureMatrix, h: &HyperParams, plan: &FoldPlan) -> Result<MetricsReport, EvalError> {
    cross_validate_detailed(m, h, plan).map(|o| o.report)
}

pub fn cross_validate_detailed(m: &FeatureMatrix, h: &HyperParams, plan: &FoldPlan) -> Result<CvOutcome, EvalError> {
    if !plan.covers(m) {
        return Err(EvalError::PlanMismatch);
    }
    let folds: Vec<Vec<HeldOutPrediction>> = (0..plan.k)
        .into_par_iter()
        .map(|fold| {
            let (train_rows, test_rows) = plan.split(fold);
            let seed = derive_seed(plan.seed, "cv-fold", fold as u64);
            let model = train(&m.subset(&train_rows), h, seed).map_err(|source| EvalError::Fold { fold, source })?;
            test_rows
                .iter()
                .map(|&r| {
                    let row = &m.rows()[r];
                    let p = predict(&model, &row.x).map_err(|source| EvalError::Fold { fold, source })?;
                    Ok(HeldOutPrediction {
                        id: row.id.clone(),
                        fold,
                        truth: row.y,
                        label: p.label,
                        score: p.score,
                    })
                })
                .collect()
        })
        .collect::<Result<_, EvalError>>()?;
    let mut pooled = ConfusionMatrix::default();
    let mut per_fold = Vec::with_capacity(plan.k);
    for preds in &folds {
        let cm = ConfusionMatrix::from_pairs(preds.iter().map(|p| (p.truth, p.label)));
        pooled.merge(&cm);
        per_fold.push(compute_metrics(&cm));
    }
    let mut predictions: Vec<HeldOutPrediction> = folds.into_iter().flatten().collect();
    let position: std::collections::HashMap<&str, usize> =
        m.rows().iter().enumerate().map(|(i, r)| (r.id.as_str(), i)).collect();
    predictions.sort_by_key(|p| position[p.id.as_str()]);
    Ok(CvOutcome {
        report: MetricsReport::pooled(pooled, per_fold),
        predictions,
    })
}
