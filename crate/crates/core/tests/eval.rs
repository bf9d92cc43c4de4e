use std::collections::BTreeSet;

use candor_core::eval::report::parse_text_tables;
use candor_core::eval::{
    baseline_random, compute_metrics, cross_validate, cross_validate_detailed, enumerate_grid, grid_search,
    make_folds, render_report, ConfusionMatrix, EvalError, MetricScores, MetricsReport,
};
use candor_core::learners::{FeatureMatrix, FeatureRow, HyperParams, ModelKind};
use candor_core::seed::rng;
use candor_core::synth::two_blobs;
use proptest::prelude::*;
use rand::Rng;

fn rows(n: usize, pos: usize, dim: usize, seed: u64) -> FeatureMatrix {
    let mut r = rng(seed);
    FeatureMatrix::new(
        dim,
        (0..n)
            .map(|i| FeatureRow {
                id: format!("r{i:04}"),
                x: (0..dim).map(|_| r.random_range(-1.0..1.0)).collect(),
                y: u8::from(i < pos),
            })
            .collect(),
    )
    .unwrap()
}

#[test]
fn folds_of_ten_rows() {
    let plan = make_folds(&rows(10, 5, 1, 0), 10, 3, false).unwrap();
    assert_eq!(plan.fold_sizes(), vec![1; 10]);
}

#[test]
fn balanced_802_rows_stratified() {
    let m = rows(802, 401, 1, 0);
    for seed in [0, 7, 42] {
        let plan = make_folds(&m, 10, seed, true).unwrap();
        for f in 0..10 {
            let members: Vec<usize> = (0..802).filter(|&i| plan.fold_of_row(i) == f).collect();
            assert!(matches!(members.len(), 80 | 81));
            let pos = members.iter().filter(|&&i| m.rows()[i].y == 1).count();
            assert!(matches!(pos, 40 | 41) && matches!(members.len() - pos, 40 | 41));
        }
    }
}

#[test]
fn folds_partition_random_rows() {
    let m = rows(100, 37, 2, 5);
    let plan = make_folds(&m, 7, 11, false).unwrap();
    let mut union = BTreeSet::new();
    for f in 0..7 {
        let (train, test) = plan.split(f);
        assert_eq!(train.len() + test.len(), 100);
        for i in test {
            assert!(union.insert(m.rows()[i].id.clone()), "row in two folds");
        }
    }
    let all: BTreeSet<String> = m.rows().iter().map(|r| r.id.clone()).collect();
    assert_eq!(union, all);
    let sizes = plan.fold_sizes();
    assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
    assert_eq!(plan, make_folds(&m, 7, 11, false).unwrap());
    assert!(matches!(make_folds(&m, 101, 0, true), Err(EvalError::TooFewRows { .. })));
}

// Per-prediction counting oracle.
fn brute_force(tp: u64, tn: u64, fp: u64, fn_: u64) -> MetricScores {
    let mut pairs = Vec::new();
    pairs.extend(std::iter::repeat_n((1u8, 1u8), tp as usize));
    pairs.extend(std::iter::repeat_n((0, 0), tn as usize));
    pairs.extend(std::iter::repeat_n((0, 1), fp as usize));
    pairs.extend(std::iter::repeat_n((1, 0), fn_ as usize));
    let count = |f: &dyn Fn(&(u8, u8)) -> bool| pairs.iter().filter(|p| f(p)).count() as f64;
    let n = pairs.len() as f64;
    let correct = count(&|(t, p)| t == p);
    let pred_pos = count(&|(_, p)| *p == 1);
    let true_pos = count(&|(t, p)| *t == 1 && *p == 1);
    let actual_pos = count(&|(t, _)| *t == 1);
    let true_neg = count(&|(t, p)| *t == 0 && *p == 0);
    let false_pos = count(&|(t, p)| *t == 0 && *p == 1);
    let false_neg = count(&|(t, p)| *t == 1 && *p == 0);
    let div = |a: f64, b: f64| if b == 0.0 { 0.0 } else { a / b };
    let precision = div(true_pos, pred_pos);
    let recall = div(true_pos, actual_pos);
    let den = ((true_pos + false_pos) * (true_pos + false_neg) * (true_neg + false_pos) * (true_neg + false_neg)).sqrt();
    MetricScores {
        accuracy: div(correct, n),
        precision,
        recall,
        f1: div(2.0 * precision * recall, precision + recall),
        mcc: div(true_pos * true_neg - false_pos * false_neg, den),
        degenerate: vec![],
    }
}

fn pearson(tp: u64, tn: u64, fp: u64, fn_: u64) -> Option<f64> {
    let pairs: Vec<(f64, f64)> = [(tp, (1.0, 1.0)), (tn, (0.0, 0.0)), (fp, (0.0, 1.0)), (fn_, (1.0, 0.0))]
        .iter()
        .flat_map(|&(k, p)| std::iter::repeat_n(p, k as usize))
        .collect();
    let n = pairs.len() as f64;
    let (mx, my) = (pairs.iter().map(|p| p.0).sum::<f64>() / n, pairs.iter().map(|p| p.1).sum::<f64>() / n);
    let cov: f64 = pairs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let vx: f64 = pairs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let vy: f64 = pairs.iter().map(|p| (p.1 - my).powi(2)).sum();
    (vx > 0.0 && vy > 0.0).then(|| cov / (vx * vy).sqrt())
}

#[test]
fn metrics_equal_brute_force_for_totals_up_to_20() {
    let mut cases = 0;
    for tp in 0..=20u64 {
        for tn in 0..=20 - tp {
            for fp in 0..=20 - tp - tn {
                for fn_ in 0..=20 - tp - tn - fp {
                    if tp + tn + fp + fn_ == 0 {
                        continue;
                    }
                    cases += 1;
                    let got = compute_metrics(&ConfusionMatrix::new(tp, tn, fp, fn_)).scores;
                    let want = brute_force(tp, tn, fp, fn_);
                    assert_eq!(
                        [got.accuracy, got.precision, got.recall, got.f1, got.mcc],
                        [want.accuracy, want.precision, want.recall, want.f1, want.mcc],
                        "{tp} {tn} {fp} {fn_}"
                    );
                    if let Some(r) = pearson(tp, tn, fp, fn_) {
                        assert!((r - got.mcc).abs() < 1e-12);
                    }
                }
            }
        }
    }
    assert_eq!(cases, 10625);
}

// Reference confusion rates (tn, tp, fp, fn) and the expected
// (accuracy, precision, recall, f1, mcc) per model.
const REFERENCE_ROWS: [(ModelKind, [f64; 4], [f64; 5]); 5] = [
    (ModelKind::Svm, [0.432, 0.457, 0.025, 0.086], [0.889, 0.949, 0.841, 0.892, 0.785]),
    (ModelKind::Logreg, [0.407, 0.469, 0.049, 0.074], [0.877, 0.905, 0.864, 0.884, 0.753]),
    (ModelKind::Mlp, [0.358, 0.482, 0.099, 0.062], [0.840, 0.830, 0.886, 0.857, 0.676]),
    (ModelKind::Rforest, [0.371, 0.420, 0.085, 0.124], [0.790, 0.829, 0.773, 0.800, 0.581]),
    (ModelKind::Gbt, [0.358, 0.420, 0.099, 0.124], [0.778, 0.810, 0.773, 0.791, 0.555]),
];

#[test]
fn reference_rates_reproduce_metric_rows() {
    for (kind, [tn, tp, fp, fn_], want) in REFERENCE_ROWS {
        let s = MetricScores::from_cells(tp, tn, fp, fn_);
        let got = [s.accuracy, s.precision, s.recall, s.f1, s.mcc];
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() <= 0.005, "{kind}: {got:?} vs {want:?}");
        }
    }
}

#[test]
fn baseline_arithmetic() {
    let model = MetricScores {
        accuracy: 0.889,
        precision: 0.949,
        recall: 0.841,
        f1: 0.892,
        mcc: 0.785,
        degenerate: vec![],
    };
    let b = baseline_random(401, 236_660, &model).unwrap();
    assert_eq!((b.precision, b.recall, b.f1), (0.0017, 0.5, 0.0034));
    let i = b.improvement;
    assert_eq!((i.precision_x, i.recall_x, i.f1_x), (558.235, 1.682, 262.353));
    assert!((b.exact_precision - 401.0 / 236_660.0).abs() < 1e-15);
}

#[test]
fn leave_one_out_matches_hand_tabulation() {
    let m = rows(12, 6, 2, 3);
    let plan = make_folds(&m, 12, 1, false).unwrap();
    let h = HyperParams::defaults(ModelKind::Dtree);
    let out = cross_validate_detailed(&m, &h, &plan).unwrap();
    // Tabulate by training on all rows but one, one row at a time.
    let mut cm = ConfusionMatrix::default();
    for i in 0..12 {
        let keep: Vec<usize> = (0..12).filter(|&j| j != i).collect();
        let model = candor_core::learners::train(&m.subset(&keep), &h, 0).unwrap();
        let p = model.predict(&m.rows()[i].x).unwrap();
        cm.record(m.rows()[i].y, p.label);
        assert_eq!(out.predictions[i].label, p.label);
    }
    assert_eq!(out.report.confusion, cm);
    assert_eq!(out.report.confusion.total(), 12);
    assert_eq!(out.report.per_fold.as_ref().unwrap().len(), 12);
}

#[test]
fn blobs_cross_validated_accuracy() {
    let m = two_blobs(100, 8, 2.0, 17);
    let plan = make_folds(&m, 10, 7, true).unwrap();
    for kind in ModelKind::ALL {
        let r = cross_validate(&m, &HyperParams::defaults(kind), &plan).unwrap();
        assert!(r.accuracy() >= 0.95, "{kind}: {}", r.accuracy());
        assert_eq!(r.aggregate, "pooled");
    }
}

#[test]
fn constant_features_give_chance_accuracy() {
    let m = FeatureMatrix::new(
        3,
        (0..100)
            .map(|i| FeatureRow {
                id: format!("c{i}"),
                x: vec![1.0, 1.0, 1.0],
                y: (i % 2) as u8,
            })
            .collect(),
    )
    .unwrap();
    let plan = make_folds(&m, 10, 3, true).unwrap();
    for kind in ModelKind::ALL {
        let r = cross_validate(&m, &HyperParams::defaults(kind), &plan).unwrap();
        assert!((r.accuracy() - 0.5).abs() <= 0.1, "{kind}: {}", r.accuracy());
    }
}

#[test]
fn single_class_fold_named_in_error() {
    let m = rows(20, 1, 2, 0);
    let plan = make_folds(&m, 5, 0, false).unwrap();
    match cross_validate(&m, &HyperParams::defaults(ModelKind::Logreg), &plan) {
        Err(EvalError::Fold { fold, .. }) => assert!(fold < 5),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn grid_search_equals_manual_loop() {
    let m = two_blobs(30, 3, 0.4, 2);
    let grid = vec![
        ("lambda".to_string(), vec![1e-4, 1e-2, 1.0, 10.0]),
        ("lr".to_string(), vec![0.1, 0.01]),
    ];
    let result = grid_search(&m, ModelKind::Logreg, &grid, 5, 9).unwrap();
    assert_eq!(result.table.len(), 8);
    let plan = make_folds(&m, 5, 9, true).unwrap();
    let mut best: Option<(HyperParams, MetricsReport)> = None;
    for cell in enumerate_grid(&grid) {
        let h = HyperParams::new(ModelKind::Logreg, &cell).unwrap();
        let r = cross_validate(&m, &h, &plan).unwrap();
        let better = match &best {
            None => true,
            Some((_, b)) => r.f1() > b.f1() || (r.f1() == b.f1() && r.accuracy() > b.accuracy()),
        };
        if better {
            best = Some((h, r));
        }
    }
    assert_eq!(result.best, best.unwrap().0);
    assert!(result.table.windows(2).all(|w| w[0].1.f1() >= w[1].1.f1()));
}

#[test]
fn grid_single_and_dominant_cells() {
    let m = two_blobs(30, 3, 2.0, 4);
    let one = vec![("c".to_string(), vec![1.0])];
    assert_eq!(grid_search(&m, ModelKind::Svm, &one, 5, 0).unwrap().best.get("c"), 1.0);
    let two = vec![("max_depth".to_string(), vec![1.0, 4.0]), ("min_samples".to_string(), vec![200.0])];
    let r = grid_search(&m, ModelKind::Dtree, &two, 5, 0).unwrap();
    // min_samples 200 keeps every tree a single leaf, so both cells tie and
    // the earlier one wins.
    assert_eq!(r.best.get("max_depth"), 1.0);
    assert!(matches!(grid_search(&m, ModelKind::Svm, &vec![], 5, 0), Err(EvalError::EmptyGrid)));
}

#[test]
fn grid_best_invariant_to_value_order() {
    let m = two_blobs(25, 3, 0.5, 6);
    let a = vec![("c".to_string(), vec![0.1, 1.0, 10.0])];
    let b = vec![("c".to_string(), vec![10.0, 0.1, 1.0])];
    let ra = grid_search(&m, ModelKind::Svm, &a, 5, 1).unwrap();
    let rb = grid_search(&m, ModelKind::Svm, &b, 5, 1).unwrap();
    let key = |r: &candor_core::eval::GridResult| (r.table[0].1.f1(), r.table[0].1.accuracy());
    assert_eq!(key(&ra), key(&rb));
}

#[test]
fn report_tables_from_reference_rates() {
    let results: Vec<(ModelKind, MetricsReport)> = REFERENCE_ROWS
        .iter()
        .map(|(k, [tn, tp, fp, fn_], _)| {
            // Scale rates to counts out of 1000.
            let c = |x: f64| (x * 1000.0).round() as u64;
            (*k, compute_metrics(&ConfusionMatrix::new(c(*tp), c(*tn), c(*fp), c(*fn_))))
        })
        .collect();
    let doc = render_report(&results, None);
    let parsed = parse_text_tables(&doc.to_text());
    let labels: Vec<&str> = parsed.iter().map(|(l, _)| l.as_str()).collect();
    assert_eq!(labels, ["SVM", "LR", "NN", "RF", "GBT"]);
    for ((_, vals), (_, _, want)) in parsed.iter().zip(REFERENCE_ROWS) {
        let got = [vals[5], vals[6], vals[7], vals[8], vals[4]];
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() <= 0.005);
        }
    }
}

fn r3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

proptest! {
    #[test]
    fn report_round_trips_at_three_decimals(cells in proptest::collection::vec((0u64..50, 0u64..50, 0u64..50, 0u64..50), 0..6)) {
        let results: Vec<(ModelKind, MetricsReport)> = cells
            .iter()
            .zip(ModelKind::ALL)
            .filter(|((a, b, c, d), _)| a + b + c + d > 0)
            .map(|(&(tp, tn, fp, fn_), k)| (k, compute_metrics(&ConfusionMatrix::new(tp, tn, fp, fn_))))
            .collect();
        let doc = render_report(&results, None);
        let parsed = parse_text_tables(&doc.to_text());
        prop_assert_eq!(parsed.len(), doc.models.len());
        for ((label, vals), m) in parsed.iter().zip(&doc.models) {
            prop_assert_eq!(label, &m.label);
            let [tp, tn, fp, fn_] = m.metrics.confusion.rates();
            let s = &m.metrics.scores;
            let want = [tn, tp, fp, fn_, s.mcc, s.accuracy, s.precision, s.recall, s.f1].map(r3);
            for (g, w) in vals.iter().zip(want) {
                prop_assert!((g - w).abs() < 1e-9, "{} vs {}", g, w);
            }
        }
    }

    #[test]
    fn metric_ranges_and_swap_symmetry(tp in 0u64..100, tn in 0u64..100, fp in 0u64..100, fn_ in 0u64..100) {
        prop_assume!(tp + tn + fp + fn_ > 0);
        let s = MetricScores::from_confusion(&ConfusionMatrix::new(tp, tn, fp, fn_));
        for v in [s.accuracy, s.precision, s.recall, s.f1] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        prop_assert!((-1.0..=1.0).contains(&s.mcc));
        let t = MetricScores::from_confusion(&ConfusionMatrix::new(tn, tp, fn_, fp));
        prop_assert!((s.mcc - t.mcc).abs() < 1e-12);
        let rates: f64 = ConfusionMatrix::new(tp, tn, fp, fn_).rates().iter().sum();
        prop_assert!((rates - 1.0).abs() < 1e-9);
    }
}

#[test]
fn identical_seeds_give_identical_reports() {
    let m = two_blobs(40, 4, 1.0, 3);
    let run = || {
        let r = grid_search(&m, ModelKind::Rforest, &ModelKind::Rforest.default_grid(), 10, 5).unwrap();
        render_report(&[(ModelKind::Rforest, r.table[0].1.clone())], None).to_json()
    };
    assert_eq!(run(), run());
}
