//! Cross-validation, grid search, metrics, the random-classifier baseline
//! and report rendering.

mod baseline;
mod cv;
mod folds;
mod grid;
mod metrics;
pub mod report;

use thiserror::Error;

use crate::learners::{LearnerError, ModelKind};

pub use baseline::{baseline_random, round_to, BaselineReport, Improvement};
pub use cv::{cross_validate, cross_validate_detailed, CvOutcome, HeldOutPrediction};
pub use folds::{make_folds, FoldPlan};
pub use grid::{enumerate_grid, grid_search, Grid, GridResult};
pub use metrics::{compute_metrics, ConfusionMatrix, MetricScores, MetricsReport, Spread};
pub use report::{baseline_block, render_report, taxonomy_block, ReportDocument};

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("k must be at least 2, got {0}")]
    KTooSmall(usize),
    #[error("cannot split {rows} rows into {k} folds")]
    TooFewRows { rows: usize, k: usize },
    #[error("fold plan does not match the feature matrix")]
    PlanMismatch,
    #[error("fold {fold}: {source}")]
    Fold { fold: usize, source: LearnerError },
    #[error("grid cell {cell} ({params}): {source}")]
    Cell {
        cell: usize,
        params: String,
        source: Box<EvalError>,
    },
    #[error("grid is empty")]
    EmptyGrid,
    #[error("grid for {kind}: {source}")]
    GridParam { kind: ModelKind, source: LearnerError },
    #[error("baseline needs 0 < positives <= total (got {positives}/{total})")]
    Baseline { positives: u64, total: u64 },
}
