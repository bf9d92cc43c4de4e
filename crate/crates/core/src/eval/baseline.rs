//! Random-classifier baseline.
//!
//! Precision is the share of positives in the population and recall is 0.5.
//! The comparison reproduces the usual hand arithmetic: baseline precision
//! and F1 are rounded to 4 decimals before use, the model metrics are
//! rounded to 3 decimals, and the improvement ratios are reported to 3
//! decimals. Unrounded values are kept alongside.

use serde::{Deserialize, Serialize};

use super::metrics::MetricScores;
use super::EvalError;

/// Round half away from zero to `decimals` places.
pub fn round_to(x: f64, decimals: i32) -> f64 {
    let p = 10f64.powi(decimals);
    (x * p).round() / p
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Improvement {
    pub precision_x: f64,
    pub recall_x: f64,
    pub f1_x: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineReport {
    pub positives: u64,
    pub total: u64,
    /// Rounded to 4 decimals.
    pub precision: f64,
    pub recall: f64,
    /// From the rounded precision, rounded to 4 decimals.
    pub f1: f64,
    pub exact_precision: f64,
    pub exact_f1: f64,
    /// Model precision/recall/F1 at 3 decimals.
    pub model_precision: f64,
    pub model_recall: f64,
    pub model_f1: f64,
    pub improvement: Improvement,
    pub exact_improvement: Improvement,
}

pub fn baseline_random(positives: u64, total: u64, model: &MetricScores) -> Result<BaselineReport, EvalError> {
    if positives == 0 || total == 0 || positives > total {
        return Err(EvalError::Baseline { positives, total });
    }
    let recall = 0.5;
    let exact_precision = positives as f64 / total as f64;
    let exact_f1 = 2.0 * exact_precision * recall / (exact_precision + recall);
    let precision = round_to(exact_precision, 4);
    let f1 = round_to(2.0 * precision * recall / (precision + recall), 4);
    let (mp, mr, mf) = (round_to(model.precision, 3), round_to(model.recall, 3), round_to(model.f1, 3));
    Ok(BaselineReport {
        positives,
        total,
        precision,
        recall,
        f1,
        exact_precision,
        exact_f1,
        model_precision: mp,
        model_recall: mr,
        model_f1: mf,
        improvement: Improvement {
            precision_x: round_to(mp / precision, 3),
            recall_x: round_to(mr / recall, 3),
            f1_x: round_to(mf / f1, 3),
        },
        exact_improvement: Improvement {
            precision_x: model.precision / exact_precision,
            recall_x: model.recall / recall,
            f1_x: model.f1 / exact_f1,
        },
    })
}
