//! Binary classifiers with a shared train / predict / serialize contract.
//!
//! Six kinds are available: L2-regularized logistic regression, a linear
//! soft-margin SVM, a CART decision tree, a bagged random forest, gradient
//! boosted regression trees and a one-hidden-layer perceptron.
//!
//! Label 1 is a violation, 0 a non-violation. [`predict`] returns a score
//! and the label `score >= threshold`, where the threshold is 0.5 for
//! probability-like scores and 0 for SVM margins.

mod forest;
mod gbt;
pub mod io;
mod logreg;
mod mlp;
mod standardize;
mod svm;
mod tree;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embed::{Fingerprint, ReviewVector};

pub use forest::ForestModel;
pub use gbt::{train_with_trace as train_gbt_with_trace, GbtModel};
pub use logreg::{objective_and_gradient as logreg_objective, LogregModel};
pub use mlp::{loss_and_gradient as mlp_loss_and_gradient, MlpModel};
pub use standardize::Standardizer;
pub use svm::SvmModel;
pub use tree::{Node, Tree};

#[derive(Debug, Error, PartialEq)]
pub enum LearnerError {
    #[error("feature matrix is empty")]
    Empty,
    #[error("{kind} needs both classes in the training data")]
    SingleClass { kind: ModelKind },
    #[error("row {row} ({id}): non-finite feature value")]
    NonFinite { row: usize, id: String },
    #[error("row {row} ({id}): expected {expected} features, found {found}")]
    RowDim {
        row: usize,
        id: String,
        expected: usize,
        found: usize,
    },
    #[error("row {row} ({id}): label must be 0 or 1")]
    BadLabel { row: usize, id: String },
    #[error("feature vector has {found} components, model expects {expected}")]
    DimMismatch { expected: usize, found: usize },
    #[error("{kind}: unknown hyperparameter `{name}`")]
    UnknownParam { kind: ModelKind, name: String },
    #[error("{kind}: hyperparameter `{name}` = {value} outside {min}..={max}{}", if *.integer { " (integer)" } else { "" })]
    BadParam {
        kind: ModelKind,
        name: String,
        value: f64,
        min: f64,
        max: f64,
        integer: bool,
    },
    #[error("unknown model kind {0:?}")]
    UnknownKind(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Logreg,
    Svm,
    Dtree,
    Rforest,
    Gbt,
    Mlp,
}

impl ModelKind {
    pub const ALL: [ModelKind; 6] = [
        ModelKind::Logreg,
        ModelKind::Svm,
        ModelKind::Dtree,
        ModelKind::Rforest,
        ModelKind::Gbt,
        ModelKind::Mlp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Logreg => "logreg",
            ModelKind::Svm => "svm",
            ModelKind::Dtree => "dtree",
            ModelKind::Rforest => "rforest",
            ModelKind::Gbt => "gbt",
            ModelKind::Mlp => "mlp",
        }
    }

    /// Column label in comparison tables.
    pub fn short_label(self) -> &'static str {
        match self {
            ModelKind::Logreg => "LR",
            ModelKind::Svm => "SVM",
            ModelKind::Dtree => "DT",
            ModelKind::Rforest => "RF",
            ModelKind::Gbt => "GBT",
            ModelKind::Mlp => "NN",
        }
    }

    pub fn from_short_label(s: &str) -> Option<Self> {
        ModelKind::ALL.into_iter().find(|k| k.short_label() == s)
    }

    /// Margin and probabilistic learners cannot fit a single class.
    pub fn needs_both_classes(self) -> bool {
        !matches!(self, ModelKind::Dtree | ModelKind::Rforest)
    }

    /// Whether features are z-scored before fitting.
    pub fn standardizes(self) -> bool {
        matches!(self, ModelKind::Logreg | ModelKind::Svm | ModelKind::Mlp)
    }

    pub fn schema(self) -> &'static [ParamSpec] {
        match self {
            ModelKind::Logreg => &LOGREG_SCHEMA,
            ModelKind::Svm => &SVM_SCHEMA,
            ModelKind::Dtree => &DTREE_SCHEMA,
            ModelKind::Rforest => &RFOREST_SCHEMA,
            ModelKind::Gbt => &GBT_SCHEMA,
            ModelKind::Mlp => &MLP_SCHEMA,
        }
    }

    /// Default tuning grid, as `(name, values)` in enumeration order.
    pub fn default_grid(self) -> Vec<(String, Vec<f64>)> {
        let g: &[(&str, &[f64])] = match self {
            ModelKind::Logreg => &[("lambda", &[1e-4, 1e-3, 1e-2, 1e-1]), ("lr", &[0.1, 0.01])],
            ModelKind::Svm => &[("c", &[0.1, 1.0, 10.0]), ("epochs", &[50.0, 200.0])],
            ModelKind::Dtree => &[("max_depth", &[4.0, 8.0, 16.0]), ("min_samples", &[2.0, 5.0])],
            ModelKind::Rforest => &[("trees", &[50.0, 100.0]), ("max_depth", &[8.0, 16.0])],
            ModelKind::Gbt => &[
                ("rounds", &[50.0, 100.0]),
                ("shrinkage", &[0.05, 0.1]),
                ("depth", &[2.0, 3.0]),
            ],
            ModelKind::Mlp => &[("hidden", &[16.0, 64.0]), ("lr", &[0.01, 0.001]), ("epochs", &[100.0])],
        };
        g.iter().map(|(n, v)| (n.to_string(), v.to_vec())).collect()
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = LearnerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == lower || k.short_label().eq_ignore_ascii_case(&lower))
            .or(match lower.as_str() {
                "lr" => Some(ModelKind::Logreg),
                "nn" => Some(ModelKind::Mlp),
                "rf" => Some(ModelKind::Rforest),
                "dt" => Some(ModelKind::Dtree),
                _ => None,
            })
            .ok_or(LearnerError::UnknownKind(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamSpec {
    pub name: &'static str,
    pub default: f64,
    pub min: f64,
    pub max: f64,
    pub integer: bool,
}

const fn real(name: &'static str, default: f64, min: f64, max: f64) -> ParamSpec {
    ParamSpec {
        name,
        default,
        min,
        max,
        integer: false,
    }
}

const fn int(name: &'static str, default: f64, min: f64, max: f64) -> ParamSpec {
    ParamSpec {
        name,
        default,
        min,
        max,
        integer: true,
    }
}

// Lower bounds of 0 on step sizes are excluded in `HyperParams::new`.
const LOGREG_SCHEMA: [ParamSpec; 4] = [
    real("lambda", 1e-3, 0.0, 1e6),
    real("lr", 0.1, 0.0, 100.0),
    int("max_iter", 10_000.0, 1.0, 1e7),
    real("tol", 1e-6, 0.0, 1.0),
];
const SVM_SCHEMA: [ParamSpec; 2] = [real("c", 1.0, 0.0, 1e6), int("epochs", 200.0, 1.0, 1e6)];
/// `max_depth = 0` means unlimited.
const DTREE_SCHEMA: [ParamSpec; 2] = [int("max_depth", 0.0, 0.0, 1000.0), int("min_samples", 2.0, 1.0, 1e9)];
/// `max_features = 0` means `floor(sqrt(dim))`.
const RFOREST_SCHEMA: [ParamSpec; 4] = [
    int("trees", 100.0, 1.0, 10_000.0),
    int("max_depth", 16.0, 0.0, 1000.0),
    int("min_samples", 2.0, 1.0, 1e9),
    int("max_features", 0.0, 0.0, 1e7),
];
const GBT_SCHEMA: [ParamSpec; 4] = [
    int("rounds", 100.0, 1.0, 10_000.0),
    real("shrinkage", 0.1, 0.0, 1.0),
    int("depth", 3.0, 1.0, 64.0),
    int("min_samples", 2.0, 1.0, 1e9),
];
const MLP_SCHEMA: [ParamSpec; 6] = [
    int("hidden", 64.0, 1.0, 4096.0),
    real("lr", 0.01, 0.0, 10.0),
    int("epochs", 100.0, 1.0, 1e6),
    real("momentum", 0.9, 0.0, 0.999),
    int("batch", 32.0, 1.0, 1e9),
    real("l2", 0.0, 0.0, 1e3),
];

const STRICTLY_POSITIVE: [&str; 4] = ["lr", "tol", "c", "shrinkage"];

/// Fully resolved hyperparameters: every schema entry is present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    pub kind: ModelKind,
    pub params: BTreeMap<String, f64>,
}

impl HyperParams {
    /// Validates `overrides` against the schema and fills in defaults.
    pub fn new(kind: ModelKind, overrides: &BTreeMap<String, f64>) -> Result<Self, LearnerError> {
        let schema = kind.schema();
        for (name, &value) in overrides {
            let spec = schema
                .iter()
                .find(|s| s.name == name)
                .ok_or_else(|| LearnerError::UnknownParam {
                    kind,
                    name: name.clone(),
                })?;
            let positive_ok = !STRICTLY_POSITIVE.contains(&spec.name) || value > 0.0;
            if !value.is_finite()
                || value < spec.min
                || value > spec.max
                || !positive_ok
                || (spec.integer && value.fract() != 0.0)
            {
                return Err(LearnerError::BadParam {
                    kind,
                    name: name.clone(),
                    value,
                    min: spec.min,
                    max: spec.max,
                    integer: spec.integer,
                });
            }
        }
        let params = schema
            .iter()
            .map(|s| (s.name.to_string(), overrides.get(s.name).copied().unwrap_or(s.default)))
            .collect();
        Ok(Self { kind, params })
    }

    pub fn defaults(kind: ModelKind) -> Self {
        Self::new(kind, &BTreeMap::new()).expect("defaults are valid")
    }

    pub fn with(kind: ModelKind, pairs: &[(&str, f64)]) -> Result<Self, LearnerError> {
        let m = pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        Self::new(kind, &m)
    }

    pub fn get(&self, name: &str) -> f64 {
        self.params[name]
    }

    pub fn get_usize(&self, name: &str) -> usize {
        self.params[name] as usize
    }

    /// `name=value` pairs joined by commas, in schema order.
    pub fn describe(&self) -> String {
        self.kind
            .schema()
            .iter()
            .map(|s| format!("{}={}", s.name, self.params[s.name]))
            .collect::<Vec<_>>()
            .join(",")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub id: String,
    pub x: Vec<f64>,
    pub y: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    dim: usize,
    rows: Vec<FeatureRow>,
}

impl FeatureMatrix {
    pub fn new(dim: usize, rows: Vec<FeatureRow>) -> Result<Self, LearnerError> {
        for (i, r) in rows.iter().enumerate() {
            if r.x.len() != dim {
                return Err(LearnerError::RowDim {
                    row: i,
                    id: r.id.clone(),
                    expected: dim,
                    found: r.x.len(),
                });
            }
            if r.y > 1 {
                return Err(LearnerError::BadLabel { row: i, id: r.id.clone() });
            }
            if r.x.iter().any(|v| !v.is_finite()) {
                return Err(LearnerError::NonFinite { row: i, id: r.id.clone() });
            }
        }
        Ok(Self { dim, rows })
    }

    /// Joins review vectors with labels; vectors without a label are skipped.
    pub fn from_vectors(vectors: &[ReviewVector], label_of: impl Fn(&str) -> Option<u8>) -> Result<Self, LearnerError> {
        let dim = vectors.first().map_or(0, |v| v.vector.len());
        let rows = vectors
            .iter()
            .filter_map(|v| {
                label_of(&v.review_id).map(|y| FeatureRow {
                    id: v.review_id.clone(),
                    x: v.vector.clone(),
                    y,
                })
            })
            .collect();
        Self::new(dim, rows)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> &[FeatureRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn class_counts(&self) -> [usize; 2] {
        let pos = self.rows.iter().filter(|r| r.y == 1).count();
        [self.rows.len() - pos, pos]
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            dim: self.dim,
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelParams {
    Logreg(LogregModel),
    Svm(SvmModel),
    Dtree(Tree),
    Rforest(ForestModel),
    Gbt(GbtModel),
    Mlp(MlpModel),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub kind: ModelKind,
    pub hyperparams: HyperParams,
    pub fingerprint: Fingerprint,
    pub train_seed: u64,
    pub standardizer: Option<Standardizer>,
    pub params: ModelParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: u8,
    pub score: f64,
}

/// Trains a model of `h.kind` on `m`. Deterministic in `(m, h, seed)`.
pub fn train(m: &FeatureMatrix, h: &HyperParams, seed: u64) -> Result<TrainedModel, LearnerError> {
    train_with_fingerprint(m, h, seed, Fingerprint::raw(m.dim()))
}

pub fn train_with_fingerprint(
    m: &FeatureMatrix,
    h: &HyperParams,
    seed: u64,
    fingerprint: Fingerprint,
) -> Result<TrainedModel, LearnerError> {
    if m.is_empty() {
        return Err(LearnerError::Empty);
    }
    let kind = h.kind;
    let [neg, pos] = m.class_counts();
    if kind.needs_both_classes() && (neg == 0 || pos == 0) {
        return Err(LearnerError::SingleClass { kind });
    }
    let xs_raw: Vec<&[f64]> = m.rows.iter().map(|r| r.x.as_slice()).collect();
    let ys: Vec<u8> = m.rows.iter().map(|r| r.y).collect();
    let standardizer = kind.standardizes().then(|| Standardizer::fit(&xs_raw, m.dim));
    let scaled: Vec<Vec<f64>>;
    let xs: Vec<&[f64]> = match &standardizer {
        Some(s) => {
            scaled = xs_raw.iter().map(|x| s.transform(x)).collect();
            scaled.iter().map(Vec::as_slice).collect()
        }
        None => xs_raw,
    };
    let params = match kind {
        ModelKind::Logreg => ModelParams::Logreg(logreg::train(&xs, &ys, h)),
        ModelKind::Svm => ModelParams::Svm(svm::train(&xs, &ys, h, seed)),
        ModelKind::Dtree => ModelParams::Dtree(tree::train_classifier(
            &xs,
            &ys,
            h.get_usize("max_depth"),
            h.get_usize("min_samples"),
            None,
        )),
        ModelKind::Rforest => ModelParams::Rforest(forest::train(&xs, &ys, h, seed)),
        ModelKind::Gbt => ModelParams::Gbt(gbt::train(&xs, &ys, h)),
        ModelKind::Mlp => ModelParams::Mlp(mlp::train(&xs, &ys, h, seed)),
    };
    Ok(TrainedModel {
        kind,
        hyperparams: h.clone(),
        fingerprint,
        train_seed: seed,
        standardizer,
        params,
    })
}

pub fn predict(model: &TrainedModel, x: &[f64]) -> Result<Prediction, LearnerError> {
    if x.len() != model.fingerprint.dim {
        return Err(LearnerError::DimMismatch {
            expected: model.fingerprint.dim,
            found: x.len(),
        });
    }
    let scaled;
    let x = match &model.standardizer {
        Some(s) => {
            scaled = s.transform(x);
            scaled.as_slice()
        }
        None => x,
    };
    let (score, threshold) = match &model.params {
        ModelParams::Logreg(p) => (p.probability(x), 0.5),
        ModelParams::Svm(p) => (p.margin(x), 0.0),
        ModelParams::Dtree(t) => (t.evaluate(x), 0.5),
        ModelParams::Rforest(f) => (f.vote_fraction(x), 0.5),
        ModelParams::Gbt(g) => (g.probability(x), 0.5),
        ModelParams::Mlp(n) => (n.probability(x), 0.5),
    };
    Ok(Prediction {
        label: u8::from(score >= threshold),
        score,
    })
}

impl TrainedModel {
    pub fn predict(&self, x: &[f64]) -> Result<Prediction, LearnerError> {
        predict(self, x)
    }
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
pub(crate) fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_points() -> FeatureMatrix {
        FeatureMatrix::new(
            1,
            vec![
                FeatureRow { id: "a".into(), x: vec![-1.0], y: 0 },
                FeatureRow { id: "b".into(), x: vec![1.0], y: 1 },
            ],
        )
        .unwrap()
    }

    #[test]
    fn every_learner_fits_two_points() {
        let m = two_points();
        for kind in ModelKind::ALL {
            let model = train(&m, &HyperParams::defaults(kind), 3).unwrap();
            for r in m.rows() {
                assert_eq!(predict(&model, &r.x).unwrap().label, r.y, "{kind} on {}", r.id);
            }
        }
    }

    #[test]
    fn single_class_rejected_for_margin_and_probabilistic_learners() {
        let m = FeatureMatrix::new(1, vec![FeatureRow { id: "a".into(), x: vec![0.0], y: 1 }]).unwrap();
        for kind in ModelKind::ALL {
            let res = train(&m, &HyperParams::defaults(kind), 0);
            if kind.needs_both_classes() {
                assert_eq!(res.unwrap_err(), LearnerError::SingleClass { kind });
            } else {
                assert_eq!(predict(&res.unwrap(), &[5.0]).unwrap().label, 1);
            }
        }
    }

    #[test]
    fn non_finite_feature_rejected() {
        let err = FeatureMatrix::new(1, vec![FeatureRow { id: "z".into(), x: vec![f64::NAN], y: 0 }]).unwrap_err();
        assert!(matches!(err, LearnerError::NonFinite { row: 0, .. }));
    }

    #[test]
    fn zero_logreg_scores_one_half() {
        let model = TrainedModel {
            kind: ModelKind::Logreg,
            hyperparams: HyperParams::defaults(ModelKind::Logreg),
            fingerprint: Fingerprint::raw(3),
            train_seed: 0,
            standardizer: None,
            params: ModelParams::Logreg(LogregModel { weights: vec![0.0; 3], bias: 0.0 }),
        };
        assert_eq!(predict(&model, &[4.0, -2.0, 9.0]).unwrap().score, 0.5);
    }

    #[test]
    fn svm_margin_is_dot_product() {
        let model = TrainedModel {
            kind: ModelKind::Svm,
            hyperparams: HyperParams::defaults(ModelKind::Svm),
            fingerprint: Fingerprint::raw(2),
            train_seed: 0,
            standardizer: None,
            params: ModelParams::Svm(SvmModel { weights: vec![1.0, 0.0], bias: 0.0 }),
        };
        let p = predict(&model, &[2.0, 5.0]).unwrap();
        assert_eq!(p, Prediction { label: 1, score: 2.0 });
    }

    #[test]
    fn forest_vote_fraction() {
        let leaf = |v: f64| Tree { nodes: vec![Node::Leaf { value: v }] };
        let model = TrainedModel {
            kind: ModelKind::Rforest,
            hyperparams: HyperParams::defaults(ModelKind::Rforest),
            fingerprint: Fingerprint::raw(1),
            train_seed: 0,
            standardizer: None,
            params: ModelParams::Rforest(ForestModel { trees: vec![leaf(1.0), leaf(0.8), leaf(0.1)] }),
        };
        let p = predict(&model, &[0.0]).unwrap();
        assert_eq!(p.label, 1);
        assert!((p.score - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn dim_mismatch_is_error() {
        let model = train(&two_points(), &HyperParams::defaults(ModelKind::Logreg), 0).unwrap();
        assert_eq!(
            predict(&model, &[1.0, 2.0]).unwrap_err(),
            LearnerError::DimMismatch { expected: 1, found: 2 }
        );
    }

    #[test]
    fn hyperparam_schema_checks() {
        assert!(matches!(
            HyperParams::with(ModelKind::Svm, &[("gamma", 1.0)]),
            Err(LearnerError::UnknownParam { .. })
        ));
        assert!(matches!(
            HyperParams::with(ModelKind::Dtree, &[("max_depth", 2.5)]),
            Err(LearnerError::BadParam { .. })
        ));
        assert!(matches!(
            HyperParams::with(ModelKind::Logreg, &[("lr", 0.0)]),
            Err(LearnerError::BadParam { .. })
        ));
        let h = HyperParams::with(ModelKind::Gbt, &[("rounds", 7.0)]).unwrap();
        assert_eq!(h.get_usize("rounds"), 7);
        assert_eq!(h.get("shrinkage"), 0.1);
    }

    #[test]
    fn default_grids_are_valid() {
        for kind in ModelKind::ALL {
            for (name, values) in kind.default_grid() {
                for v in values {
                    HyperParams::with(kind, &[(name.as_str(), v)]).unwrap();
                }
            }
        }
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("svm".parse::<ModelKind>().unwrap(), ModelKind::Svm);
        assert_eq!("NN".parse::<ModelKind>().unwrap(), ModelKind::Mlp);
        assert_eq!("rf".parse::<ModelKind>().unwrap(), ModelKind::Rforest);
        assert!("knn".parse::<ModelKind>().is_err());
    }
}
