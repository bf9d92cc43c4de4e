//! Comparison report in plain text and JSON.
//!
//! The text form has three blocks: confusion rates with MCC, the four
//! headline metrics, and (when given) the baseline comparison. Model columns
//! are ordered SVM, LR, NN, RF, GBT, then any other kinds. Metric cells use
//! 3 decimals with halves rounded away from zero. Lines starting with `#`
//! carry run metadata.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::baseline::{round_to, BaselineReport};
use super::metrics::MetricsReport;
use crate::learners::ModelKind;
use crate::taxonomy::TaxonomyStats;

pub const COLUMN_ORDER: [ModelKind; 6] = [
    ModelKind::Svm,
    ModelKind::Logreg,
    ModelKind::Mlp,
    ModelKind::Rforest,
    ModelKind::Gbt,
    ModelKind::Dtree,
];

pub const CONFUSION_ROWS: [&str; 5] = ["True negative", "True positive", "False positive", "False negative", "MCC"];
pub const METRIC_ROWS: [&str; 4] = ["Accuracy", "Precision", "Recall", "F1 score"];

const LABEL_WIDTH: usize = 16;
const CELL_WIDTH: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelEntry {
    pub kind: ModelKind,
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hyperparams: Option<String>,
    pub metrics: MetricsReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    /// Fully resolved run configuration.
    pub config: BTreeMap<String, String>,
    pub models: Vec<ModelEntry>,
    pub baseline: Option<BaselineReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub taxonomy: Option<TaxonomyStats>,
}

fn order_key(kind: ModelKind) -> usize {
    COLUMN_ORDER.iter().position(|&k| k == kind).unwrap_or(COLUMN_ORDER.len())
}

/// Builds the report document; results are reordered into column order.
pub fn render_report(results: &[(ModelKind, MetricsReport)], baseline: Option<&BaselineReport>) -> ReportDocument {
    let mut models: Vec<ModelEntry> = results
        .iter()
        .map(|(kind, metrics)| ModelEntry {
            kind: *kind,
            label: kind.short_label().to_string(),
            hyperparams: None,
            metrics: metrics.clone(),
        })
        .collect();
    models.sort_by_key(|m| order_key(m.kind));
    ReportDocument {
        config: BTreeMap::new(),
        models,
        baseline: baseline.cloned(),
        taxonomy: None,
    }
}

/// Three decimals, halves rounded away from zero.
fn fmt3(x: f64) -> String {
    format!("{:.3}", round_to(x, 3))
}

fn fmt_trim(x: f64, decimals: usize) -> String {
    let s = format!("{:.decimals$}", round_to(x, decimals as i32));
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

impl ReportDocument {
    pub fn with_config(mut self, config: BTreeMap<String, String>) -> Self {
        self.config = config;
        self
    }

    pub fn with_taxonomy(mut self, stats: TaxonomyStats) -> Self {
        self.taxonomy = Some(stats);
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialize");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.config {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        if !self.config.is_empty() {
            out.push('\n');
        }
        let header = |title: &str, out: &mut String| {
            out.push_str(title);
            out.push('\n');
            out.push_str(&format!("{:<LABEL_WIDTH$}", ""));
            for m in &self.models {
                out.push_str(&format!("{:>CELL_WIDTH$}", m.label));
            }
            out.push('\n');
        };
        let row = |label: &str, values: Vec<f64>, out: &mut String| {
            out.push_str(&format!("{label:<LABEL_WIDTH$}"));
            for v in values {
                out.push_str(&format!("{:>CELL_WIDTH$}", fmt3(v)));
            }
            out.push('\n');
        };

        header("Confusion rates and MCC", &mut out);
        for (i, label) in CONFUSION_ROWS.iter().enumerate() {
            let values = self
                .models
                .iter()
                .map(|m| {
                    let [tp, tn, fp, fn_] = m.metrics.confusion.rates();
                    [tn, tp, fp, fn_, m.metrics.scores.mcc][i]
                })
                .collect();
            row(label, values, &mut out);
        }
        out.push('\n');
        header("Classification metrics", &mut out);
        for (i, label) in METRIC_ROWS.iter().enumerate() {
            let values = self
                .models
                .iter()
                .map(|m| {
                    let s = &m.metrics.scores;
                    [s.accuracy, s.precision, s.recall, s.f1][i]
                })
                .collect();
            row(label, values, &mut out);
        }
        if self.models.iter().any(|m| m.hyperparams.is_some()) {
            out.push_str("\nHyperparameters\n");
            for m in &self.models {
                let h = m.hyperparams.as_deref().unwrap_or("-");
                out.push_str(&format!("{:<LABEL_WIDTH$}{h}\n", m.label));
            }
        }
        if let Some(b) = &self.baseline {
            out.push('\n');
            out.push_str(&baseline_block(b));
        }
        if let Some(t) = &self.taxonomy {
            out.push('\n');
            out.push_str(&taxonomy_block(t));
        }
        out
    }
}

/// Random-baseline comparison: model and baseline rows plus improvements.
pub fn baseline_block(b: &BaselineReport) -> String {
    let mut out = format!(
        "Baseline comparison (random classifier, {} positives of {})\n",
        b.positives, b.total
    );
    out.push_str(&format!(
        "{:<LABEL_WIDTH$}{:>CELL_WIDTH$}{:>CELL_WIDTH$}{:>CELL_WIDTH$}\n",
        "", "Precision", "Recall", "F1"
    ));
    let mut line = |label: &str, cells: [String; 3]| {
        out.push_str(&format!("{label:<LABEL_WIDTH$}"));
        for c in cells {
            out.push_str(&format!("{c:>CELL_WIDTH$}"));
        }
        out.push('\n');
    };
    line("Model", [b.model_precision, b.model_recall, b.model_f1].map(fmt3));
    line("Random", [b.precision, b.recall, b.f1].map(|v| fmt_trim(v, 4)));
    let imp = b.improvement;
    line("Improvement", [imp.precision_x, imp.recall_x, imp.f1_x].map(|v| format!("{v:.3}x")));
    out
}

/// One `name  count (pct%)` line per category.
pub fn taxonomy_block(t: &TaxonomyStats) -> String {
    let mut out = format!("Violation categories (n = {})\n", t.n_violations);
    for (f, cell) in t.categories.iter().zip(t.render_cells()) {
        out.push_str(&format!("{:<42}{cell}\n", f.category.display_name()));
    }
    out
}

/// Per-model values parsed back from [`ReportDocument::to_text`]:
/// `(label, [tn, tp, fp, fn, mcc, accuracy, precision, recall, f1])`.
pub fn parse_text_tables(text: &str) -> Vec<(String, [f64; 9])> {
    let mut labels: Vec<String> = Vec::new();
    let mut rows: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    let mut in_tables = false;
    for line in text.lines() {
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        if line == "Confusion rates and MCC" || line == "Classification metrics" {
            in_tables = true;
            continue;
        }
        if line == "Hyperparameters" || line.starts_with("Baseline comparison") || line.starts_with("Violation categories") {
            in_tables = false;
            continue;
        }
        if !in_tables {
            continue;
        }
        let (label, rest) = line.split_at(LABEL_WIDTH.min(line.len()));
        let label = label.trim();
        if label.is_empty() {
            labels = rest.split_whitespace().map(str::to_string).collect();
            continue;
        }
        if let Some(name) = CONFUSION_ROWS.iter().chain(METRIC_ROWS.iter()).find(|n| **n == label) {
            rows.insert(name, rest.split_whitespace().filter_map(|v| v.parse().ok()).collect());
        }
    }
    let order: Vec<&str> = CONFUSION_ROWS.iter().chain(METRIC_ROWS.iter()).copied().collect();
    labels
        .iter()
        .enumerate()
        .map(|(i, label)| {
            let mut vals = [0.0; 9];
            for (j, name) in order.iter().enumerate() {
                vals[j] = rows.get(name).and_then(|r| r.get(i)).copied().unwrap_or(f64::NAN);
            }
            (label.clone(), vals)
        })
        .collect()
}
