use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use candor_core::corpus::{
    export_corpus, load_corpus, load_labeled, merge_corpora, CollisionPolicy, CorpusFormat, Label, LoadOutcome,
};
use candor_core::embed::{embed_corpus, load_precomputed, write_precomputed, Fingerprint};
use candor_core::eval::{
    baseline_block, baseline_random, cross_validate, grid_search, make_folds, render_report, taxonomy_block, Grid,
    MetricScores, MetricsReport,
};
use candor_core::learners::io::{load_model, save_model};
use candor_core::learners::{predict, train_with_fingerprint, FeatureRow};
use candor_core::taxonomy::{compute_frequencies, load_definitions};
use candor_core::textprep::{
    default_stop_words, filter_corpus, load_dictionary, parse_word_list, preprocess, MatchMode, Stage,
};
use candor_core::{
    FeatureMatrix, HyperParams, KeywordDictionary, ModelKind, PreprocessConfig, ProviderConfig, ReviewCorpus,
    WordVectorTable,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::*;

/// Keys that only say where output goes; they never change results and are
/// left out of recorded configs so reruns into other paths stay identical.
const OUTPUT_KEYS: [&str; 4] = ["out", "report", "model-out", "config"];

pub fn run(cmd: Command, out: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::Ingest(a) => ingest(&a, out),
        Command::Filter(a) => filter(&a, out),
        Command::Preprocess(a) => preprocess_cmd(&a, out),
        Command::Embed(a) => embed(&a, out),
        Command::Train(a) => train_cmd(&a, out),
        Command::Evaluate(a) => evaluate(&a, out),
        Command::CompareBaseline(a) => compare_baseline(&a, out),
        Command::Predict(a) => predict_cmd(&a, out),
        Command::TaxonomyStats(a) => taxonomy_stats(&a, out),
        Command::Serve(a) => serve(&a),
        Command::Pipeline(a) => pipeline(&a, out),
    }
}

// ---------------------------------------------------------------------------
// Shared helpers

/// Flattens a serialized argument struct into `flag -> value` strings.
pub fn resolved_config(command: &str, args: &impl Serialize) -> BTreeMap<String, String> {
    fn walk(v: &Value, out: &mut BTreeMap<String, String>) {
        let Value::Object(map) = v else { return };
        for (k, v) in map {
            let key = k.replace('_', "-");
            match v {
                Value::Object(_) => walk(v, out),
                Value::Null => {}
                Value::Array(items) if items.is_empty() => {}
                Value::String(s) => {
                    out.insert(key, s.clone());
                }
                Value::Array(items) => {
                    let parts: Vec<String> = items
                        .iter()
                        .map(|i| i.as_str().map_or_else(|| i.to_string(), str::to_string))
                        .collect();
                    out.insert(key, parts.join(","));
                }
                other => {
                    out.insert(key, other.to_string());
                }
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(&serde_json::to_value(args).expect("args serialize"), &mut out);
    for k in OUTPUT_KEYS {
        out.remove(k);
    }
    out.insert("command".into(), command.into());
    out
}

fn corpus_format(path: &Path, f: InputFormat) -> CorpusFormat {
    match f {
        InputFormat::Auto => CorpusFormat::from_path(path),
        InputFormat::Csv => CorpusFormat::Csv,
        InputFormat::Jsonl => CorpusFormat::Jsonl,
    }
}

fn load(path: &Path, f: InputFormat) -> Result<LoadOutcome> {
    load_corpus(path, corpus_format(path, f)).with_context(|| format!("loading {}", path.display()))
}

fn dictionary(a: &DictArgs) -> Result<KeywordDictionary> {
    let d = if a.dict == "default" {
        KeywordDictionary::default_honesty()
    } else {
        load_dictionary(Path::new(&a.dict)).with_context(|| format!("loading dictionary {}", a.dict))?
    };
    Ok(d.with_mode(match a.match_mode {
        Match::Token => MatchMode::Token,
        Match::Substring => MatchMode::Substring,
    }))
}

fn prep_config(a: &PrepArgs) -> Result<PreprocessConfig> {
    let stops = match a.stopwords.as_str() {
        "default" => default_stop_words(),
        "none" => Default::default(),
        path => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading stop words {path}"))?;
            parse_word_list(&text).into_iter().collect()
        }
    };
    let steps = a
        .steps
        .split(',')
        .map(|s| s.parse::<Stage>())
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PreprocessConfig::default().with_stop_words(stops).with_steps(steps)?)
}

fn first_vector_len(path: &Path) -> Result<usize> {
    let f = BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?);
    for line in f.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let v: Value = serde_json::from_str(&line).with_context(|| format!("parsing {}", path.display()))?;
        return v["vector"]
            .as_array()
            .map(Vec::len)
            .ok_or_else(|| anyhow!("{}: first row has no `vector` array", path.display()));
    }
    bail!("{} is empty", path.display())
}

/// `default_dim` fills in `--dim` when it is absent (hashed provider only).
fn provider(a: &ProviderArgs, seed: u64, default_dim: usize) -> Result<ProviderConfig> {
    let need_path = || {
        a.vectors
            .as_deref()
            .ok_or_else(|| anyhow!("--vectors is required for the {:?} provider", a.provider))
    };
    Ok(match a.provider {
        Provider::Hashed => ProviderConfig::Hashed {
            dim: a.dim.unwrap_or(default_dim),
            seed,
        },
        Provider::WordTable => {
            let p = need_path()?;
            ProviderConfig::WordTable(
                WordVectorTable::load(p, a.dim).with_context(|| format!("loading word vectors {}", p.display()))?,
            )
        }
        Provider::Precomputed => {
            let p = need_path()?;
            let dim = match a.dim {
                Some(d) => d,
                None => first_vector_len(p)?,
            };
            ProviderConfig::Precomputed {
                dim,
                vectors: load_precomputed(p, dim).with_context(|| format!("loading vectors {}", p.display()))?,
            }
        }
    })
}

fn provider_config_entries(p: &ProviderConfig, config: &mut BTreeMap<String, String>) {
    config.insert("dim".into(), p.dim().to_string());
    config.insert("featurizer".into(), p.fingerprint().descriptor);
}

/// Labels by review id, from `--labels` or each review's `label` field.
fn label_map(corpus: &ReviewCorpus, a: &LabelArgs) -> Result<BTreeMap<String, u8>> {
    if let Some(path) = &a.labels {
        let examples = load_labeled(path).with_context(|| format!("loading labels {}", path.display()))?;
        return Ok(examples.into_iter().map(|e| (e.review_id, e.label.as_bit())).collect());
    }
    let mut out = BTreeMap::new();
    for r in corpus.reviews() {
        if let Some(v) = r.extra.get("label") {
            let label: Label = v.parse().map_err(|e: String| anyhow!("review {:?}: {e}", r.id))?;
            out.insert(r.id.clone(), label.as_bit());
        }
    }
    Ok(out)
}

fn write_out(path: Option<&Path>, out: &mut dyn Write, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?);
            f(&mut w)?;
            w.flush()?;
            Ok(())
        }
        None => f(out),
    }
}

fn emit(out: &mut dyn Write, format: OutputFormat, text: String, value: Value) -> Result<()> {
    match format {
        OutputFormat::Text => out.write_all(text.as_bytes())?,
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut *out, &value)?;
            out.write_all(b"\n")?;
        }
    }
    Ok(())
}

fn read_feature_rows(path: &Path) -> Result<FeatureMatrix> {
    let f = BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?);
    let mut rows = Vec::new();
    for (i, line) in f.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row: FeatureRow =
            serde_json::from_str(&line).with_context(|| format!("{}:{}: bad feature row", path.display(), i + 1))?;
        rows.push(row);
    }
    let dim = rows.first().map_or(0, |r| r.x.len());
    Ok(FeatureMatrix::new(dim, rows)?)
}

/// Feature matrix plus the fingerprint of whatever produced it.
fn features(a: &FeatureArgs, seed: u64, config: &mut BTreeMap<String, String>) -> Result<(FeatureMatrix, Fingerprint)> {
    if let Some(path) = &a.features {
        let m = read_feature_rows(path)?;
        let fp = Fingerprint::raw(m.dim());
        config.insert("dim".into(), m.dim().to_string());
        config.insert("featurizer".into(), fp.descriptor.clone());
        for k in ["provider", "stopwords", "steps", "input-format"] {
            config.remove(k);
        }
        return Ok((m, fp));
    }
    let input = a.input.as_deref().expect("clap requires --in or --features");
    let corpus = load(input, a.input_format)?.corpus;
    let cfg = prep_config(&a.prep)?;
    let p = provider(&a.provider, seed, 768)?;
    provider_config_entries(&p, config);
    let labels = label_map(&corpus, &a.labels)?;
    let vectors = embed_corpus(&corpus, &cfg, &p)?;
    let m = FeatureMatrix::from_vectors(&vectors, |id| labels.get(id).copied())?;
    Ok((m, p.fingerprint()))
}

fn check_trainable(m: &FeatureMatrix) -> Result<()> {
    if m.is_empty() {
        bail!("no labelled rows: pass --labels or give reviews a `label` field");
    }
    Ok(())
}

fn parse_kinds(names: &[String]) -> Result<Vec<ModelKind>> {
    let mut kinds = Vec::new();
    for n in names {
        let n = n.trim();
        if n == "all" {
            kinds.extend(ModelKind::ALL);
            continue;
        }
        kinds.push(n.parse::<ModelKind>()?);
    }
    let mut seen = Vec::new();
    kinds.retain(|k| {
        let fresh = !seen.contains(k);
        seen.push(*k);
        fresh
    });
    if kinds.is_empty() {
        bail!("no model kinds given");
    }
    Ok(kinds)
}

/// Splits `kind.name` / `name` and finds the kinds a key applies to.
fn key_targets(key: &str, kinds: &[ModelKind]) -> Result<(String, Vec<ModelKind>)> {
    if let Some((k, name)) = key.split_once('.') {
        let kind: ModelKind = k.parse()?;
        if !kinds.contains(&kind) {
            bail!("{key:?} names a model that is not being run");
        }
        return Ok((name.to_string(), vec![kind]));
    }
    let targets: Vec<ModelKind> = kinds
        .iter()
        .copied()
        .filter(|k| k.schema().iter().any(|s| s.name == key))
        .collect();
    if targets.is_empty() {
        bail!("no selected model has a parameter {key:?}");
    }
    Ok((key.to_string(), targets))
}

fn parse_params(items: &[String], kinds: &[ModelKind]) -> Result<BTreeMap<ModelKind, BTreeMap<String, f64>>> {
    let mut out: BTreeMap<ModelKind, BTreeMap<String, f64>> = kinds.iter().map(|k| (*k, BTreeMap::new())).collect();
    for item in items {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| anyhow!("--param {item:?}: expected name=value"))?;
        let value: f64 = value.trim().parse().with_context(|| format!("--param {item:?}"))?;
        let (name, targets) = key_targets(key.trim(), kinds)?;
        for k in targets {
            out.get_mut(&k).expect("selected kind").insert(name.clone(), value);
        }
    }
    Ok(out)
}

fn parse_grid_file(text: &str, kinds: &[ModelKind]) -> Result<BTreeMap<ModelKind, Grid>> {
    let mut out: BTreeMap<ModelKind, Grid> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, values) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("grid line {}: expected `name = v1, v2`", i + 1))?;
        let values: Vec<f64> = values
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .with_context(|| format!("grid line {}", i + 1))?;
        let (name, targets) = key_targets(key.trim(), kinds).with_context(|| format!("grid line {}", i + 1))?;
        for k in targets {
            out.entry(k).or_default().push((name.clone(), values.clone()));
        }
    }
    Ok(out)
}

/// Per-kind grid, or `None` where the kind is evaluated at fixed params.
/// Fixed overrides join the grid as single-value axes.
fn resolve_grids(
    spec: &str,
    kinds: &[ModelKind],
    params: &BTreeMap<ModelKind, BTreeMap<String, f64>>,
) -> Result<BTreeMap<ModelKind, Option<Grid>>> {
    let base: BTreeMap<ModelKind, Grid> = match spec {
        "none" => BTreeMap::new(),
        "default" => kinds.iter().map(|k| (*k, k.default_grid())).collect(),
        path => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading grid {path}"))?;
            parse_grid_file(&text, kinds)?
        }
    };
    Ok(kinds
        .iter()
        .map(|k| {
            let grid = base.get(k).cloned().map(|mut g| {
                for (name, v) in &params[k] {
                    match g.iter_mut().find(|(n, _)| n == name) {
                        Some(axis) => axis.1 = vec![*v],
                        None => g.push((name.clone(), vec![*v])),
                    }
                }
                g
            });
            (*k, grid)
        })
        .collect())
}

struct Evaluated {
    kind: ModelKind,
    params: HyperParams,
    report: MetricsReport,
}

fn evaluate_models(
    m: &FeatureMatrix,
    kinds: &[ModelKind],
    opts: &EvalOpts,
    grid_default: &str,
    seed: u64,
    config: &mut BTreeMap<String, String>,
) -> Result<Vec<Evaluated>> {
    let params = parse_params(&opts.params, kinds)?;
    let grid_spec = opts.grid.as_deref().unwrap_or(grid_default);
    config.insert("grid".into(), grid_spec.to_string());
    let grids = resolve_grids(grid_spec, kinds, &params)?;
    let plan = make_folds(m, opts.k, seed, true)?;
    let mut out = Vec::with_capacity(kinds.len());
    for &kind in kinds {
        let (h, report) = match &grids[&kind] {
            Some(grid) => {
                let g = grid_search(m, kind, grid, opts.k, seed).with_context(|| format!("grid search for {kind}"))?;
                let (h, report) = g.table.into_iter().next().expect("grid result has cells");
                (h, report)
            }
            None => {
                let h = HyperParams::new(kind, &params[&kind])?;
                let report = cross_validate(m, &h, &plan).with_context(|| format!("cross-validating {kind}"))?;
                (h, report)
            }
        };
        out.push(Evaluated { kind, params: h, report });
    }
    Ok(out)
}

fn report_document(
    results: &[Evaluated],
    opts: &EvalOpts,
    mut config: BTreeMap<String, String>,
) -> Result<candor_core::eval::ReportDocument> {
    let baseline = match (opts.baseline_positives, opts.baseline_total) {
        (Some(p), Some(t)) => {
            // compare the strongest model: highest F1, earliest column on ties
            let best = results
                .iter()
                .min_by_key(|r| {
                    (
                        std::cmp::Reverse(ordered(r.report.scores.f1)),
                        candor_core::eval::report::COLUMN_ORDER.iter().position(|k| *k == r.kind),
                    )
                })
                .expect("at least one model");
            config.insert("baseline-model".into(), best.kind.name().into());
            Some(baseline_random(p, t, &best.report.scores)?)
        }
        (None, None) => None,
        _ => bail!("--baseline-positives and --baseline-total go together"),
    };
    let pairs: Vec<(ModelKind, MetricsReport)> = results.iter().map(|r| (r.kind, r.report.clone())).collect();
    let mut doc = render_report(&pairs, baseline.as_ref()).with_config(config);
    for entry in &mut doc.models {
        let r = results.iter().find(|r| r.kind == entry.kind).expect("same kinds");
        entry.hyperparams = Some(r.params.describe());
    }
    Ok(doc)
}

fn ordered(x: f64) -> u64 {
    // F1 lies in [0, 1]; the bit pattern of a non-negative float orders like the value
    x.max(0.0).to_bits()
}

fn write_report(
    doc: &candor_core::eval::ReportDocument,
    format: OutputFormat,
    path: Option<&Path>,
    out: &mut dyn Write,
) -> Result<()> {
    let text = match format {
        OutputFormat::Text => doc.to_text(),
        OutputFormat::Json => doc.to_json(),
    };
    if let Some(p) = path {
        std::fs::write(p, &text).with_context(|| format!("writing report {}", p.display()))?;
    }
    out.write_all(text.as_bytes())?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Subcommands

fn ingest(a: &IngestArgs, out: &mut dyn Write) -> Result<()> {
    let policy = match a.collision {
        Collision::Error => CollisionPolicy::Error,
        Collision::PreferA => CollisionPolicy::PreferA,
        Collision::PreferB => CollisionPolicy::PreferB,
    };
    let mut merged: Option<ReviewCorpus> = None;
    let mut files = Vec::new();
    let mut text = String::new();
    for path in &a.inputs {
        let o = load(path, a.input_format)?;
        text.push_str(&format!(
            "{}: {} reviews, {} skipped\n",
            path.display(),
            o.corpus.len(),
            o.skipped.len()
        ));
        for s in &o.skipped {
            text.push_str(&format!("  row {} ({}): {}\n", s.row, s.id, s.reason));
        }
        files.push(json!({"path": path, "reviews": o.corpus.len(), "skipped": o.skipped}));
        merged = Some(match merged {
            None => o.corpus,
            Some(acc) => merge_corpora(&acc, &o.corpus, policy)?,
        });
    }
    let corpus = merged.expect("clap requires one --in");
    let s = corpus.stats();
    text.push_str(&format!(
        "reviews: {}\napps: {}\ncategories: {}\n",
        s.n_reviews, s.n_apps, s.n_categories
    ));
    if let Some(p) = &a.out {
        export_corpus(&corpus, p, CorpusFormat::from_path(p)).with_context(|| format!("writing {}", p.display()))?;
    }
    emit(out, a.common.format, text, json!({"files": files, "stats": s}))
}

fn filter(a: &FilterArgs, out: &mut dyn Write) -> Result<()> {
    let corpus = load(&a.corpus.input, a.corpus.input_format)?.corpus;
    let d = dictionary(&a.dict)?;
    let kept = filter_corpus(&corpus, &d);
    if let Some(p) = &a.out {
        export_corpus(&kept, p, CorpusFormat::from_path(p)).with_context(|| format!("writing {}", p.display()))?;
    }
    let text = format!(
        "keywords: {}\nreviews: {}\ncandidates: {}\n",
        d.keywords().len(),
        corpus.len(),
        kept.len()
    );
    emit(
        out,
        a.common.format,
        text,
        json!({"keywords": d.keywords().len(), "reviews": corpus.len(), "candidates": kept.len()}),
    )
}

fn preprocess_cmd(a: &PreprocessArgs, out: &mut dyn Write) -> Result<()> {
    let corpus = load(&a.corpus.input, a.corpus.input_format)?.corpus;
    let cfg = prep_config(&a.prep)?;
    write_out(a.out.as_deref(), out, |w| {
        for r in corpus.reviews() {
            serde_json::to_writer(&mut *w, &preprocess(r, &cfg))?;
            w.write_all(b"\n")?;
        }
        Ok(())
    })
}

fn embed(a: &EmbedArgs, out: &mut dyn Write) -> Result<()> {
    let corpus = load(&a.corpus.input, a.corpus.input_format)?.corpus;
    let cfg = prep_config(&a.prep)?;
    let p = provider(&a.provider, a.common.seed, 768)?;
    let vectors = embed_corpus(&corpus, &cfg, &p)?;
    let empty = vectors.iter().filter(|v| v.no_known_tokens).count();
    if empty > 0 {
        eprintln!("warning: {empty} review(s) had no known tokens and embed as zero vectors");
    }
    write_out(a.out.as_deref(), out, |w| Ok(write_precomputed(&vectors, w)?))
}

fn train_cmd(a: &TrainArgs, out: &mut dyn Write) -> Result<()> {
    let mut config = resolved_config("train", a);
    let (m, fp) = features(&a.features, a.common.seed, &mut config)?;
    check_trainable(&m)?;
    let kind: ModelKind = a.model.parse()?;
    let params = parse_params(&a.params, &[kind])?;
    let h = HyperParams::new(kind, &params[&kind])?;
    let model = train_with_fingerprint(&m, &h, a.common.seed, fp)?;
    save_model(&model, &a.out).with_context(|| format!("saving model {}", a.out.display()))?;
    let [neg, pos] = m.class_counts();
    let text = format!(
        "model: {kind}\nparams: {}\nrows: {} ({pos} violation, {neg} non-violation)\nfeaturizer: {}\n",
        h.describe(),
        m.len(),
        model.fingerprint.descriptor
    );
    emit(
        out,
        a.common.format,
        text,
        json!({"model": kind, "params": h.params, "rows": m.len(), "positives": pos, "featurizer": model.fingerprint}),
    )
}

fn evaluate(a: &EvaluateArgs, out: &mut dyn Write) -> Result<()> {
    let mut config = resolved_config("evaluate", a);
    let (m, _) = features(&a.features, a.common.seed, &mut config)?;
    check_trainable(&m)?;
    let kinds = parse_kinds(&a.eval.model)?;
    let results = evaluate_models(&m, &kinds, &a.eval, "none", a.common.seed, &mut config)?;
    config.insert("rows".into(), m.len().to_string());
    let doc = report_document(&results, &a.eval, config)?;
    write_report(&doc, a.common.format, a.eval.report.as_deref(), out)
}

fn parse_model_metrics(s: &str) -> Result<MetricScores> {
    let (mut p, mut r, mut f) = (None, None, None);
    for part in s.split(',') {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| anyhow!("--model-metrics: expected key=value, got {part:?}"))?;
        let v: f64 = v.trim().parse().with_context(|| format!("--model-metrics {part:?}"))?;
        match k.trim() {
            "p" | "precision" => p = Some(v),
            "r" | "recall" => r = Some(v),
            "f1" | "f" => f = Some(v),
            other => bail!("--model-metrics: unknown key {other:?} (use p, r, f1)"),
        }
    }
    let (Some(precision), Some(recall), Some(f1)) = (p, r, f) else {
        bail!("--model-metrics needs p, r and f1");
    };
    Ok(MetricScores {
        accuracy: 0.0,
        precision,
        recall,
        f1,
        mcc: 0.0,
        degenerate: Vec::new(),
    })
}

fn compare_baseline(a: &BaselineArgs, out: &mut dyn Write) -> Result<()> {
    let scores = parse_model_metrics(&a.model_metrics)?;
    let b = baseline_random(a.positives, a.total, &scores)?;
    emit(out, a.common.format, baseline_block(&b), serde_json::to_value(&b)?)
}

fn predict_cmd(a: &PredictArgs, out: &mut dyn Write) -> Result<()> {
    let model = load_model(&a.model).with_context(|| format!("loading model {}", a.model.display()))?;
    let corpus = load(&a.corpus.input, a.corpus.input_format)?.corpus;
    let cfg = prep_config(&a.prep)?;
    let p = provider(&a.provider, a.common.seed, model.fingerprint.dim)?;
    let fp = p.fingerprint();
    if fp != model.fingerprint {
        bail!(
            "featurizer mismatch: model was trained on {} but this run produces {}",
            model.fingerprint.descriptor,
            fp.descriptor
        );
    }
    let vectors = embed_corpus(&corpus, &cfg, &p)?;
    write_out(a.out.as_deref(), out, |w| {
        for v in &vectors {
            let pr = predict(&model, &v.vector)?;
            let row = json!({"review_id": v.review_id, "label": Label::from_bit(pr.label), "score": pr.score});
            serde_json::to_writer(&mut *w, &row)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    })
}

fn taxonomy_stats(a: &TaxonomyArgs, out: &mut dyn Write) -> Result<()> {
    let examples = load_labeled(&a.labels).with_context(|| format!("loading labels {}", a.labels.display()))?;
    let stats = compute_frequencies(&examples)?;
    let mut text = taxonomy_block(&stats);
    text.push_str(&format!("Multi-label rows: {}\n", stats.multi_label_rows));
    emit(out, a.common.format, text, serde_json::to_value(&stats)?)
}

fn serve(a: &ServeArgs) -> Result<()> {
    let corpus = match &a.corpus {
        Some(p) => Some(load(p, InputFormat::Auto)?.corpus),
        None => None,
    };
    let mut state = candor_annosvc::AppState::open(&a.data_dir, corpus)?;
    if let Some(p) = &a.definitions {
        state = state.with_definitions(load_definitions(p).with_context(|| format!("loading {}", p.display()))?);
    }
    let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    eprintln!("annotation service on http://{} (logs in {})", a.addr, a.data_dir.display());
    rt.block_on(candor_annosvc::serve(a.addr, Arc::new(state)))?;
    Ok(())
}

fn pipeline(a: &PipelineArgs, out: &mut dyn Write) -> Result<()> {
    let seed = a.common.seed;
    let mut config = resolved_config("pipeline", a);
    let loaded = load(&a.input, a.input_format)?;
    let d = dictionary(&a.dict)?;
    let candidates = filter_corpus(&loaded.corpus, &d);
    let cfg = prep_config(&a.prep)?;
    let p = provider(&a.provider, seed, 768)?;
    provider_config_entries(&p, &mut config);
    let labels = label_map(&candidates, &a.labels)?;
    let vectors = embed_corpus(&candidates, &cfg, &p)?;
    let m = FeatureMatrix::from_vectors(&vectors, |id| labels.get(id).copied())?;
    check_trainable(&m)?;
    let [neg, pos] = m.class_counts();
    config.insert("data.reviews".into(), loaded.corpus.len().to_string());
    config.insert("data.skipped".into(), loaded.skipped.len().to_string());
    config.insert("data.candidates".into(), candidates.len().to_string());
    config.insert("data.labelled".into(), format!("{} ({pos} violation, {neg} non-violation)", m.len()));

    let kinds = parse_kinds(&a.eval.model)?;
    let results = evaluate_models(&m, &kinds, &a.eval, "default", seed, &mut config)?;
    if let Some(dir) = &a.model_out {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for r in &results {
            let model = train_with_fingerprint(&m, &r.params, seed, p.fingerprint())?;
            let path: PathBuf = dir.join(format!("{}.model.json", r.kind.name()));
            save_model(&model, &path).with_context(|| format!("saving {}", path.display()))?;
        }
    }
    let doc = report_document(&results, &a.eval, config)?;
    write_report(&doc, a.common.format, a.eval.report.as_deref(), out)
}
