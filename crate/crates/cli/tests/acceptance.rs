//! Acceptance criteria A1-A8. Run with
//! `cargo test -p candor-cli --test acceptance`; prints one PASS/FAIL line
//! per criterion and exits nonzero if any fails.

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use candor_annosvc::{router, AppState, ANALYST_HEADER};
use candor_core::corpus::{write_jsonl, Review};
use candor_core::embed::{embed_average, WordVectorTable};
use candor_core::eval::{baseline_random, compute_metrics, cross_validate, make_folds, ConfusionMatrix, MetricScores};
use candor_core::learners::{logreg_objective, mlp_loss_and_gradient, FeatureMatrix, FeatureRow, HyperParams, MlpModel, ModelKind};
use candor_core::seed::rng;
use candor_core::synth::{labeled_corpus, planted_corpus, reference_violations, two_blobs, REFERENCE_COUNTS};
use candor_core::taxonomy::compute_frequencies;
use candor_core::textprep::{filter_corpus, TokenizedReview};
use candor_core::{KeywordDictionary, ReviewCorpus};
use http_body_util::BodyExt;
use rand::Rng;
use serde_json::{json, Value};
use tower::ServiceExt;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

// Reference rates (tn, tp, fp, fn) and rows (accuracy, precision, recall, F1, MCC).
const REFERENCE_ROWS: [(&str, [f64; 4], [f64; 5]); 5] = [
    ("SVM", [0.432, 0.457, 0.025, 0.086], [0.889, 0.949, 0.841, 0.892, 0.785]),
    ("LR", [0.407, 0.469, 0.049, 0.074], [0.877, 0.905, 0.864, 0.884, 0.753]),
    ("NN", [0.358, 0.482, 0.099, 0.062], [0.840, 0.830, 0.886, 0.857, 0.676]),
    ("RF", [0.371, 0.420, 0.085, 0.124], [0.790, 0.829, 0.773, 0.800, 0.581]),
    ("GBT", [0.358, 0.420, 0.099, 0.124], [0.778, 0.810, 0.773, 0.791, 0.555]),
];

fn a1() -> Outcome {
    let mut worst: f64 = 0.0;
    for (name, [tn, tp, fp, fn_], want) in REFERENCE_ROWS {
        let cm = ConfusionMatrix::new(
            (tp * 1000.0).round() as u64,
            (tn * 1000.0).round() as u64,
            (fp * 1000.0).round() as u64,
            (fn_ * 1000.0).round() as u64,
        );
        let s = compute_metrics(&cm).scores;
        for (g, w) in [s.accuracy, s.precision, s.recall, s.f1, s.mcc].iter().zip(want) {
            worst = worst.max((g - w).abs());
            ensure!((g - w).abs() <= 0.005, "{name}: got {g:.4}, expected {w}");
        }
    }
    Ok(format!("5 models x 5 metrics, max |diff| {worst:.4}"))
}

fn a2() -> Outcome {
    let model = MetricScores {
        accuracy: 0.889,
        precision: 0.949,
        recall: 0.841,
        f1: 0.892,
        mcc: 0.785,
        degenerate: vec![],
    };
    let b = baseline_random(401, 236_660, &model).map_err(|e| e.to_string())?;
    ensure!((b.precision, b.recall, b.f1) == (0.0017, 0.5, 0.0034), "baseline {:?}", (b.precision, b.recall, b.f1));
    let i = b.improvement;
    ensure!(
        (i.precision_x, i.recall_x, i.f1_x) == (558.235, 1.682, 262.353),
        "improvement {:?}",
        (i.precision_x, i.recall_x, i.f1_x)
    );
    Ok("0.0017/0.5/0.0034, 558.235x/1.682x/262.353x".into())
}

fn a3() -> Outcome {
    let stats = compute_frequencies(&reference_violations()).map_err(|e| e.to_string())?;
    ensure!(stats.n_violations == 401, "n = {}", stats.n_violations);
    let want_pct = [12.0, 14.0, 8.0, 23.0, 4.0, 26.0, 16.0, 1.5, 2.0, 7.0];
    for ((f, &count), pct) in stats.categories.iter().zip(&REFERENCE_COUNTS).zip(want_pct) {
        ensure!(f.count == count, "{:?}: count {} vs {count}", f.category, f.count);
        ensure!(f.percentage == Some(pct), "{:?}: {:?}% vs {pct}%", f.category, f.percentage);
    }
    Ok("10 categories over 401 violations".into())
}

// Metrics counted straight from a list of (truth, prediction) pairs.
fn counted(pairs: &[(u8, u8)]) -> [f64; 5] {
    let n = pairs.len() as f64;
    let c = |t: u8, p: u8| pairs.iter().filter(|&&x| x == (t, p)).count() as f64;
    let (tp, tn, fp, fn_) = (c(1, 1), c(0, 0), c(0, 1), c(1, 0));
    let div = |a: f64, b: f64| if b == 0.0 { 0.0 } else { a / b };
    let p = div(tp, tp + fp);
    let r = div(tp, tp + fn_);
    let den = ((tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_)).sqrt();
    [div(tp + tn, n), p, r, div(2.0 * p * r, p + r), div(tp * tn - fp * fn_, den)]
}

fn a4() -> Outcome {
    let mut cases = 0;
    for tp in 0..=20usize {
        for tn in 0..=20 - tp {
            for fp in 0..=20 - tp - tn {
                for fn_ in 0..=20 - tp - tn - fp {
                    if tp + tn + fp + fn_ == 0 {
                        continue;
                    }
                    let mut pairs = Vec::new();
                    for (k, pair) in [(tp, (1, 1)), (tn, (0, 0)), (fp, (0, 1)), (fn_, (1, 0))] {
                        pairs.extend(std::iter::repeat_n(pair, k));
                    }
                    let s = compute_metrics(&ConfusionMatrix::from_pairs(pairs.iter().copied())).scores;
                    let got = [s.accuracy, s.precision, s.recall, s.f1, s.mcc];
                    let want = counted(&pairs);
                    for (g, w) in got.iter().zip(want) {
                        ensure!((g - w).abs() <= 1e-12, "({tp},{tn},{fp},{fn_}): {got:?} vs {want:?}");
                    }
                    cases += 1;
                }
            }
        }
    }
    Ok(format!("{cases} matrices"))
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
}

fn a5() -> Outcome {
    let m = two_blobs(100, 8, 2.0, 17);
    let plan = make_folds(&m, 10, 7, true).map_err(|e| e.to_string())?;
    let mut accs = Vec::new();
    for kind in ModelKind::ALL {
        let r = cross_validate(&m, &HyperParams::defaults(kind), &plan).map_err(|e| e.to_string())?;
        ensure!(r.accuracy() >= 0.95, "{kind}: accuracy {}", r.accuracy());
        accs.push(format!("{}={:.3}", kind.short_label(), r.accuracy()));
    }
    let mut r = rng(21);
    let mut worst: f64 = 0.0;
    for case in 0..20u64 {
        let xs: Vec<Vec<f64>> = (0..5).map(|_| (0..3).map(|_| r.random_range(-2.0..2.0)).collect()).collect();
        let refs: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
        let ys: Vec<u8> = (0..5).map(|_| r.random_range(0..2)).collect();
        let w: Vec<f64> = (0..3).map(|_| r.random_range(-1.0..1.0)).collect();
        let b = r.random_range(-1.0..1.0);
        let (_, gw, gb) = logreg_objective(&w, b, &refs, &ys, 0.3);
        let h = 1e-5;
        for j in 0..=3 {
            let (mut wp, mut wm, mut bp, mut bm) = (w.clone(), w.clone(), b, b);
            if j < 3 {
                wp[j] += h;
                wm[j] -= h;
            } else {
                bp += h;
                bm -= h;
            }
            let fd = (logreg_objective(&wp, bp, &refs, &ys, 0.3).0 - logreg_objective(&wm, bm, &refs, &ys, 0.3).0) / (2.0 * h);
            let g = if j < 3 { gw[j] } else { gb };
            worst = worst.max(rel_err(g, fd));
            ensure!(rel_err(g, fd) < 1e-4, "logreg case {case} param {j}: {g} vs {fd}");
        }

        let mut model = MlpModel::init(3, 4, case);
        let mut theta = model.flatten();
        for t in theta.iter_mut() {
            *t += r.random_range(-0.3..0.3);
        }
        model.set_flat(&theta);
        let (_, grad) = mlp_loss_and_gradient(&model, &refs, &ys, 0.01);
        let h = 1e-6;
        for j in 0..theta.len() {
            let mut p = model.clone();
            let mut t = theta.clone();
            t[j] += h;
            p.set_flat(&t);
            let up = mlp_loss_and_gradient(&p, &refs, &ys, 0.01).0;
            t[j] -= 2.0 * h;
            p.set_flat(&t);
            let down = mlp_loss_and_gradient(&p, &refs, &ys, 0.01).0;
            let fd = (up - down) / (2.0 * h);
            // A flat ReLU unit gives zero on both sides.
            if grad[j].abs() < 1e-7 && fd.abs() < 1e-7 {
                continue;
            }
            worst = worst.max(rel_err(grad[j], fd));
            ensure!(rel_err(grad[j], fd) < 1e-4, "mlp case {case} param {j}: {} vs {fd}", grad[j]);
        }
    }
    Ok(format!("{}; gradient max rel err {worst:.1e}", accs.join(" ")))
}

fn pipeline_run(input: &Path, out: &Path) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_candor"))
        .args(["pipeline", "--in"])
        .arg(input)
        .args(["--dict", "default", "--provider", "hashed", "--dim", "64", "--model", "svm", "--k", "10", "--seed", "7"])
        .arg("--report")
        .arg(out.join("report.txt"))
        .arg("--model-out")
        .arg(out.join("models"))
        .output()
        .map_err(|e| e.to_string())?;
    ensure!(status.status.success(), "pipeline failed: {}", String::from_utf8_lossy(&status.stderr));
    Ok(())
}

fn a6() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let input = dir.path().join("reviews.jsonl");
    let corpus = labeled_corpus(500, KeywordDictionary::default_honesty().keywords(), 7);
    write_jsonl(&corpus, BufWriter::new(File::create(&input).map_err(|e| e.to_string())?)).map_err(|e| e.to_string())?;
    let (one, two) = (dir.path().join("one"), dir.path().join("two"));
    pipeline_run(&input, &one)?;
    pipeline_run(&input, &two)?;
    let read = |p: std::path::PathBuf| std::fs::read(&p).map_err(|e| format!("{}: {e}", p.display()));
    let (r1, r2) = (read(one.join("report.txt"))?, read(two.join("report.txt"))?);
    ensure!(r1 == r2, "reports differ");
    let (m1, m2) = (read(one.join("models/svm.model.json"))?, read(two.join("models/svm.model.json"))?);
    ensure!(m1 == m2, "model files differ");
    Ok(format!("report {} bytes, model {} bytes identical", r1.len(), m1.len()))
}

// Token-window matching done with space-padded string search.
fn naive_keep(text: &str, keywords: &[String]) -> bool {
    let punct = |c: char| c.is_ascii_punctuation() || "\u{2018}\u{2019}\u{201C}\u{201D}\u{2013}\u{2014}\u{2026}".contains(c);
    let squash = |s: &str| {
        let lower: String = s.chars().flat_map(char::to_lowercase).map(|c| if punct(c) { ' ' } else { c }).collect();
        format!(" {} ", lower.split_whitespace().collect::<Vec<_>>().join(" "))
    };
    let hay = squash(text);
    keywords.iter().any(|k| hay.contains(&squash(k)))
}

fn a7() -> Outcome {
    let d = KeywordDictionary::default_honesty();
    let c = planted_corpus(2000, d.keywords(), 0.3, 5);
    let got: Vec<String> = filter_corpus(&c, &d).ids().map(str::to_string).collect();
    let want: Vec<String> = c.reviews().iter().filter(|r| naive_keep(&r.text, d.keywords())).map(|r| r.id.clone()).collect();
    ensure!(got == want, "filter kept {} rows, naive scan {}", got.len(), want.len());

    let mut r = rng(99);
    let words: Vec<String> = (0..10).map(|i| format!("w{i}")).collect();
    let entries: HashMap<String, Vec<f64>> =
        words.iter().map(|w| (w.clone(), (0..8).map(|_| r.random_range(-5.0..5.0)).collect())).collect();
    let table = WordVectorTable::new(8, entries.clone()).map_err(|e| e.to_string())?;
    for case in 0..100 {
        let mut tokens: Vec<String> = (0..r.random_range(0..25)).map(|_| words[r.random_range(0..10)].clone()).collect();
        if case % 7 == 0 {
            tokens.push("unknown".into());
        }
        let mut sum = [0.0; 8];
        let mut n = 0.0;
        for t in &tokens {
            if let Some(v) = entries.get(t) {
                n += 1.0;
                for (s, x) in sum.iter_mut().zip(v) {
                    *s += x;
                }
            }
        }
        let got = embed_average(&TokenizedReview { review_id: "r".into(), tokens }, &table);
        for (g, s) in got.vector.iter().zip(sum) {
            let w = if n > 0.0 { s / n } else { 0.0 };
            ensure!((g - w).abs() <= 1e-12, "embedding case {case}: {g} vs {w}");
        }
    }

    let m = FeatureMatrix::new(
        1,
        (0..802).map(|i| FeatureRow { id: format!("r{i}"), x: vec![i as f64], y: u8::from(i < 401) }).collect(),
    )
    .map_err(|e| e.to_string())?;
    let plan = make_folds(&m, 10, 42, true).map_err(|e| e.to_string())?;
    for f in 0..10 {
        let members: Vec<usize> = (0..802).filter(|&i| plan.fold_of_row(i) == f).collect();
        let pos = members.iter().filter(|&&i| m.rows()[i].y == 1).count();
        ensure!(matches!(members.len(), 80 | 81), "fold {f} has {} rows", members.len());
        ensure!(matches!(pos, 40 | 41) && matches!(members.len() - pos, 40 | 41), "fold {f} has {pos} positives");
    }
    Ok(format!("filter kept {} of 2000; 100 averages; 10 folds of 802", got.len()))
}

async fn call(app: &Router, method: &str, uri: &str, who: Option<&str>, body: Option<Value>) -> (StatusCode, String) {
    let mut req = Request::builder().method(method).uri(uri);
    if let Some(w) = who {
        req = req.header(ANALYST_HEADER, w);
    }
    let body = match body {
        Some(v) => {
            req = req.header("content-type", "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    let resp = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8_lossy(&bytes).into_owned())
}

async fn jcall(app: &Router, method: &str, uri: &str, who: Option<&str>, body: Option<Value>) -> (StatusCode, Value) {
    let (s, text) = call(app, method, uri, who, body).await;
    (s, serde_json::from_str(&text).unwrap_or(Value::String(text)))
}

// Planned labeler proposals; rev5 gets disputed and settles as non_violation.
fn plan_for(id: &str) -> (&'static str, &'static [&'static str]) {
    match id {
        "rev0" => ("violation", &["unfair-fees"]),
        "rev2" => ("violation", &["fraudulent-looking", "no-service"]),
        "rev4" => ("violation", &["delusive-subscription"]),
        "rev5" => ("violation", &["cheating-system"]),
        "rev7" => ("violation", &["false-advertisement"]),
        _ => ("non_violation", &[]),
    }
}

async fn a8_script() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let corpus = || {
        ReviewCorpus::new(
            (0..8).map(|i| Review::new(&format!("rev{i}"), "app", "Finance", &format!("review {i}"), "test")).collect(),
        )
        .unwrap()
    };
    let app = router(Arc::new(AppState::open(dir.path(), Some(corpus())).map_err(|e| e.to_string())?));
    let spec = json!({
        "round_id": "acc", "review_ids": (0..8).map(|i| format!("rev{i}")).collect::<Vec<_>>(),
        "labeler_id": "ana", "validator_id": "ben", "shuffle_seed": 11,
    });
    let (s, v) = jcall(&app, "POST", "/rounds", None, Some(spec)).await;
    ensure!(s == StatusCode::CREATED, "create: {s} {v}");
    let order: Vec<String> = serde_json::from_value(v["review_ids"].clone()).map_err(|e| e.to_string())?;
    let mut conflicts = 0;
    for inc in 0..4 {
        let (_, st) = jcall(&app, "GET", "/rounds/acc", None, None).await;
        let ids: Vec<String> = serde_json::from_value(st["increments"][inc]["review_ids"].clone()).map_err(|e| e.to_string())?;
        let (s, _) = jcall(&app, "POST", "/rounds/acc/validations", Some("ben"), Some(json!({"review_id": ids[0], "verdict": "agree"}))).await;
        ensure!(s == StatusCode::CONFLICT, "validation before labeling: {s}");
        conflicts += 1;
        for id in &ids {
            let (l, c) = plan_for(id);
            let (s, rec) = jcall(&app, "POST", "/rounds/acc/labels", Some("ana"), Some(json!({"review_id": id, "label": l, "categories": c}))).await;
            ensure!(s == StatusCode::OK, "label {id}: {s} {rec}");
        }
        let (s, _) = jcall(&app, "GET", "/rounds/acc/export", None, None).await;
        ensure!(s == StatusCode::CONFLICT, "export before completion: {s}");
        conflicts += 1;
        for id in &ids {
            let body = if id == "rev5" {
                json!({"review_id": id, "verdict": "dispute", "counter_proposal": {"label": "non_violation", "categories": []}})
            } else {
                json!({"review_id": id, "verdict": "agree"})
            };
            let (s, rec) = jcall(&app, "POST", "/rounds/acc/validations", Some("ben"), Some(body)).await;
            ensure!(s == StatusCode::OK, "validate {id}: {s} {rec}");
        }
        if ids.iter().any(|i| i == "rev5") {
            let (s, rec) = jcall(&app, "POST", "/rounds/acc/resolutions", Some("ana"), Some(json!({"review_id": "rev5", "label": "non_violation"}))).await;
            ensure!(s == StatusCode::OK, "resolve: {s} {rec}");
        }
        let (_, st) = jcall(&app, "GET", "/rounds/acc", None, None).await;
        ensure!(st["increments"][inc]["status"] == "complete", "increment {inc}: {}", st["increments"][inc]["status"]);
    }
    let (s, export) = call(&app, "GET", "/rounds/acc/export", None, None).await;
    ensure!(s == StatusCode::OK, "export: {s}");
    let lines: Vec<Value> = export.lines().filter_map(|l| serde_json::from_str(l).ok()).collect();
    ensure!(lines.len() == 8, "export has {} lines", lines.len());
    for (line, id) in lines.iter().zip(&order) {
        let (label, cats, how) = if id == "rev5" {
            ("non_violation", &[][..], "negotiated")
        } else {
            let (l, c) = plan_for(id);
            (l, c, "agreed")
        };
        let got: BTreeSet<&str> = line["categories"].as_array().into_iter().flatten().filter_map(Value::as_str).collect();
        ensure!(
            line["review_id"] == json!(id) && line["label"] == label && line["resolution"] == how && got == cats.iter().copied().collect(),
            "export line for {id}: {line}"
        );
    }
    let (_, before) = call(&app, "GET", "/rounds/acc", None, None).await;
    let app2 = router(Arc::new(AppState::open(dir.path(), Some(corpus())).map_err(|e| e.to_string())?));
    let (_, after) = call(&app2, "GET", "/rounds/acc", None, None).await;
    ensure!(before == after, "replayed state differs");
    let (_, again) = call(&app2, "GET", "/rounds/acc/export", None, None).await;
    ensure!(export == again, "replayed export differs");
    Ok(format!("8 reviews, {conflicts} gated requests refused, replay identical"))
}

fn a8() -> Outcome {
    tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| e.to_string())?
        .block_on(a8_script())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 8] = [
        ("A1", a1, Duration::from_secs(1)),
        ("A2", a2, Duration::from_secs(1)),
        ("A3", a3, Duration::from_secs(1)),
        ("A4", a4, Duration::from_secs(5)),
        ("A5", a5, Duration::from_secs(60)),
        ("A6", a6, Duration::from_secs(60)),
        ("A7", a7, Duration::from_secs(60)),
        ("A8", a8, Duration::from_secs(10)),
    ];
    let mut failed = 0;
    for (name, f, limit) in criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if took > limit => Err(format!("{detail}; took {took:.2?}, limit {limit:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("{name} PASS ({took:.2?}) {detail}"),
            Err(why) => {
                failed += 1;
                println!("{name} FAIL ({took:.2?}) {why}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
