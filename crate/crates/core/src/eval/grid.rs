use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::metrics::MetricsReport;
use super::{cross_validate, make_folds, EvalError};
use crate::learners::{FeatureMatrix, HyperParams, ModelKind};

/// Parameter name and candidate values, in enumeration order.
pub type Grid = Vec<(String, Vec<f64>)>;

/// Cartesian product of the grid; the last parameter varies fastest.
pub fn enumerate_grid(grid: &Grid) -> Vec<BTreeMap<String, f64>> {
    let mut cells = vec![BTreeMap::new()];
    for (name, values) in grid {
        cells = cells
            .into_iter()
            .flat_map(|cell| {
                values.iter().map(move |&v| {
                    let mut c = cell.clone();
                    c.insert(name.clone(), v);
                    c
                })
            })
            .collect();
    }
    cells
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub best: HyperParams,
    /// Every cell with its report, best first.
    pub table: Vec<(HyperParams, MetricsReport)>,
}

/// Exhaustive search; every cell is cross-validated on the same stratified
/// fold plan. Best = highest pooled F1, then highest accuracy, then earliest
/// enumeration order.
pub fn grid_search(m: &FeatureMatrix, kind: ModelKind, grid: &Grid, k: usize, seed: u64) -> Result<GridResult, EvalError> {
    let cells = enumerate_grid(grid);
    if grid.is_empty() || cells.is_empty() {
        return Err(EvalError::EmptyGrid);
    }
    let params: Vec<HyperParams> = cells
        .iter()
        .map(|c| HyperParams::new(kind, c).map_err(|source| EvalError::GridParam { kind, source }))
        .collect::<Result<_, _>>()?;
    let plan = make_folds(m, k, seed, true)?;
    let mut table = Vec::with_capacity(params.len());
    for (cell, h) in params.into_iter().enumerate() {
        let report = cross_validate(m, &h, &plan).map_err(|e| EvalError::Cell {
            cell,
            params: h.describe(),
            source: Box::new(e),
        })?;
        table.push((h, report));
    }
    // stable sort keeps enumeration order among exact ties
    table.sort_by(|a, b| {
        b.1.f1()
            .total_cmp(&a.1.f1())
            .then(b.1.accuracy().total_cmp(&a.1.accuracy()))
    });
    Ok(GridResult {
        best: table[0].0.clone(),
        table,
    })
}
