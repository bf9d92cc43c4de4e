use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn new(tp: u64, tn: u64, fp: u64, fn_: u64) -> Self {
        Self { tp, tn, fp, fn_ }
    }

    /// Tallies `(truth, predicted)` pairs of 0/1 labels.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u8, u8)>) -> Self {
        let mut cm = Self::default();
        for (y, p) in pairs {
            cm.record(y, p);
        }
        cm
    }

    pub fn record(&mut self, truth: u8, predicted: u8) {
        match (truth, predicted) {
            (1, 1) => self.tp += 1,
            (0, 0) => self.tn += 1,
            (0, _) => self.fp += 1,
            _ => self.fn_ += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) {
        self.tp += other.tp;
        self.tn += other.tn;
        self.fp += other.fp;
        self.fn_ += other.fn_;
    }

    /// `(tp, tn, fp, fn)` divided by the total.
    pub fn rates(&self) -> [f64; 4] {
        let t = self.total() as f64;
        [self.tp, self.tn, self.fp, self.fn_].map(|c| c as f64 / t)
    }
}

/// The five scalar metrics. Metrics whose denominator is zero are 0 and
/// listed in `degenerate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricScores {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub mcc: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub degenerate: Vec<String>,
}

impl MetricScores {
    /// Metrics from real-valued cells (counts or rates).
    pub fn from_cells(tp: f64, tn: f64, fp: f64, fn_: f64) -> Self {
        let mut degenerate = Vec::new();
        let mut ratio = |name: &str, num: f64, den: f64| {
            if den == 0.0 {
                degenerate.push(name.to_string());
                0.0
            } else {
                num / den
            }
        };
        let total = tp + tn + fp + fn_;
        let accuracy = ratio("accuracy", tp + tn, total);
        let precision = ratio("precision", tp, tp + fp);
        let recall = ratio("recall", tp, tp + fn_);
        let f1 = ratio("f1", 2.0 * precision * recall, precision + recall);
        let mcc_den = ((tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_)).sqrt();
        let mcc = ratio("mcc", tp * tn - fp * fn_, mcc_den);
        Self {
            accuracy,
            precision,
            recall,
            f1,
            mcc,
            degenerate,
        }
    }

    pub fn from_confusion(cm: &ConfusionMatrix) -> Self {
        Self::from_cells(cm.tp as f64, cm.tn as f64, cm.fp as f64, cm.fn_ as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spread {
    pub mean: f64,
    /// Population standard deviation over folds.
    pub std: f64,
}

impl Spread {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len().max(1) as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        Self { mean, std: var.sqrt() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldSummary {
    pub accuracy: Spread,
    pub precision: Spread,
    pub recall: Spread,
    pub f1: Spread,
    pub mcc: Spread,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    #[serde(flatten)]
    pub scores: MetricScores,
    pub confusion: ConfusionMatrix,
    /// `"single"` for one confusion matrix, `"pooled"` for held-out
    /// predictions pooled over folds.
    pub aggregate: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_fold: Option<Vec<MetricsReport>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fold_summary: Option<FoldSummary>,
}

impl MetricsReport {
    pub fn accuracy(&self) -> f64 {
        self.scores.accuracy
    }

    pub fn f1(&self) -> f64 {
        self.scores.f1
    }

    pub fn pooled(confusion: ConfusionMatrix, per_fold: Vec<MetricsReport>) -> Self {
        let pick = |f: fn(&MetricScores) -> f64| Spread::of(&per_fold.iter().map(|r| f(&r.scores)).collect::<Vec<_>>());
        let summary = FoldSummary {
            accuracy: pick(|s| s.accuracy),
            precision: pick(|s| s.precision),
            recall: pick(|s| s.recall),
            f1: pick(|s| s.f1),
            mcc: pick(|s| s.mcc),
        };
        Self {
            scores: MetricScores::from_confusion(&confusion),
            confusion,
            aggregate: "pooled".into(),
            per_fold: Some(per_fold),
            fold_summary: Some(summary),
        }
    }
}

pub fn compute_metrics(cm: &ConfusionMatrix) -> MetricsReport {
    MetricsReport {
        scores: MetricScores::from_confusion(cm),
        confusion: *cm,
        aggregate: "single".into(),
        per_fold: None,
        fold_summary: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_classifier() {
        let r = compute_metrics(&ConfusionMatrix::new(50, 50, 0, 0));
        let s = &r.scores;
        assert_eq!([s.accuracy, s.precision, s.recall, s.f1, s.mcc], [1.0; 5]);
        assert!(s.degenerate.is_empty());
    }

    #[test]
    fn zero_denominators_flagged() {
        let s = MetricScores::from_confusion(&ConfusionMatrix::new(0, 5, 0, 5));
        assert_eq!(s.precision, 0.0);
        assert_eq!(s.f1, 0.0);
        assert_eq!(s.mcc, 0.0);
        assert_eq!(s.degenerate, ["precision", "f1", "mcc"]);
    }

    #[test]
    fn rates_sum_to_one() {
        let cm = ConfusionMatrix::new(3, 7, 11, 13);
        assert!((cm.rates().iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn mcc_symmetric_under_class_swap() {
        let a = MetricScores::from_confusion(&ConfusionMatrix::new(9, 4, 2, 5));
        let b = MetricScores::from_confusion(&ConfusionMatrix::new(4, 9, 5, 2));
        assert!((a.mcc - b.mcc).abs() < 1e-15);
    }

    #[test]
    fn json_uses_fn_key() {
        let s = serde_json::to_string(&ConfusionMatrix::new(1, 2, 3, 4)).unwrap();
        assert_eq!(s, r#"{"tp":1,"tn":2,"fp":3,"fn":4}"#);
    }
}
