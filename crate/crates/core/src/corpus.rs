//! Review corpora and labelled datasets: ingest, merge, export, statistics.
//!
//! Row numbers reported in errors are physical record numbers in the source
//! file, counted from 1. For CSV the header is record 1.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::taxonomy::Category;

pub const REQUIRED_FIELDS: [&str; 5] = ["id", "app_id", "app_category", "text", "source"];

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("row {row}: missing required field `{field}`")]
    MissingField { row: usize, field: String },
    #[error("row {row}: duplicate review id {id:?} (first seen on row {first_row})")]
    DuplicateId { row: usize, id: String, first_row: usize },
    #[error("row {row}: empty review id")]
    EmptyId { row: usize },
    #[error("row {row}: {message}")]
    Malformed { row: usize, message: String },
    #[error("review {id:?} has empty text")]
    EmptyText { id: String },
    #[error("merge aborted, {} colliding id(s): {}", .ids.len(), .ids.join(", "))]
    Collision { ids: Vec<String> },
    #[error("unknown corpus format {0:?} (expected csv or jsonl)")]
    UnknownFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Review {
    pub id: String,
    pub app_id: String,
    pub app_category: String,
    pub text: String,
    pub source: String,
    /// Columns or keys outside the fixed schema.
    pub extra: BTreeMap<String, String>,
}

impl Review {
    pub fn new(id: &str, app_id: &str, app_category: &str, text: &str, source: &str) -> Self {
        Self {
            id: id.into(),
            app_id: app_id.into(),
            app_category: app_category.into(),
            text: text.into(),
            source: source.into(),
            extra: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CorpusStats {
    pub n_reviews: usize,
    pub n_apps: usize,
    /// Distinct non-empty `app_category` values.
    pub n_categories: usize,
}

/// An ordered, duplicate-free collection of reviews.
///
/// Values are immutable; every transformation builds a new corpus, so the
/// statistics always match the contents.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ReviewCorpus {
    reviews: Vec<Review>,
    stats: CorpusStats,
}

impl ReviewCorpus {
    pub fn new(reviews: Vec<Review>) -> Result<Self, CorpusError> {
        let mut seen = HashMap::new();
        for (i, r) in reviews.iter().enumerate() {
            if r.id.is_empty() {
                return Err(CorpusError::EmptyId { row: i + 1 });
            }
            if r.text.trim().is_empty() {
                return Err(CorpusError::EmptyText { id: r.id.clone() });
            }
            if let Some(first) = seen.insert(r.id.as_str(), i + 1) {
                return Err(CorpusError::DuplicateId {
                    row: i + 1,
                    id: r.id.clone(),
                    first_row: first,
                });
            }
        }
        let stats = corpus_stats(&reviews);
        Ok(Self { reviews, stats })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn reviews(&self) -> &[Review] {
        &self.reviews
    }

    pub fn stats(&self) -> CorpusStats {
        self.stats
    }

    pub fn len(&self) -> usize {
        self.reviews.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reviews.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Review> {
        self.reviews.iter().find(|r| r.id == id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.reviews.iter().map(|r| r.id.as_str())
    }

    /// Keeps the reviews for which `keep` returns true, in order.
    pub fn retain(&self, mut keep: impl FnMut(&Review) -> bool) -> Self {
        let reviews: Vec<Review> = self.reviews.iter().filter(|r| keep(r)).cloned().collect();
        let stats = corpus_stats(&reviews);
        Self { reviews, stats }
    }

    pub fn into_reviews(self) -> Vec<Review> {
        self.reviews
    }
}

/// Distinct-value counts over a slice of reviews.
pub fn corpus_stats(reviews: &[Review]) -> CorpusStats {
    let apps: HashSet<&str> = reviews.iter().map(|r| r.app_id.as_str()).collect();
    let cats: HashSet<&str> = reviews
        .iter()
        .map(|r| r.app_category.as_str())
        .filter(|c| !c.is_empty())
        .collect();
    CorpusStats {
        n_reviews: reviews.len(),
        n_apps: apps.len(),
        n_categories: cats.len(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    Csv,
    Jsonl,
}

impl CorpusFormat {
    /// Guesses from the file extension; anything but `.csv` is JSONL.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => CorpusFormat::Csv,
            _ => CorpusFormat::Jsonl,
        }
    }
}

impl FromStr for CorpusFormat {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(CorpusFormat::Csv),
            "jsonl" | "json" => Ok(CorpusFormat::Jsonl),
            other => Err(CorpusError::UnknownFormat(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SkippedRow {
    pub row: usize,
    pub id: String,
    pub reason: String,
}

/// Result of [`load_corpus`]: the corpus and the rows dropped on the way.
#[derive(Debug, Clone)]
pub struct LoadOutcome {
    pub corpus: ReviewCorpus,
    pub skipped: Vec<SkippedRow>,
}

struct Ingest {
    reviews: Vec<Review>,
    seen: HashMap<String, usize>,
    skipped: Vec<SkippedRow>,
}

impl Ingest {
    fn new() -> Self {
        Self {
            reviews: Vec::new(),
            seen: HashMap::new(),
            skipped: Vec::new(),
        }
    }

    fn push(&mut self, row: usize, review: Review) -> Result<(), CorpusError> {
        if review.id.is_empty() {
            return Err(CorpusError::EmptyId { row });
        }
        if let Some(&first_row) = self.seen.get(&review.id) {
            return Err(CorpusError::DuplicateId {
                row,
                id: review.id,
                first_row,
            });
        }
        self.seen.insert(review.id.clone(), row);
        if review.text.trim().is_empty() {
            self.skipped.push(SkippedRow {
                row,
                id: review.id,
                reason: "empty text".into(),
            });
            return Ok(());
        }
        self.reviews.push(review);
        Ok(())
    }

    fn finish(self) -> LoadOutcome {
        let stats = corpus_stats(&self.reviews);
        LoadOutcome {
            corpus: ReviewCorpus {
                reviews: self.reviews,
                stats,
            },
            skipped: self.skipped,
        }
    }
}

pub fn load_corpus(path: &Path, format: CorpusFormat) -> Result<LoadOutcome, CorpusError> {
    let file = File::open(path)?;
    match format {
        CorpusFormat::Csv => read_csv(BufReader::new(file)),
        CorpusFormat::Jsonl => read_jsonl(BufReader::new(file)),
    }
}

pub fn read_csv<R: std::io::Read>(reader: R) -> Result<LoadOutcome, CorpusError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| CorpusError::Malformed {
            row: 1,
            message: e.to_string(),
        })?
        .clone();
    let mut index = HashMap::new();
    for (i, h) in headers.iter().enumerate() {
        index.insert(h.to_string(), i);
    }
    for f in REQUIRED_FIELDS {
        if !index.contains_key(f) {
            return Err(CorpusError::MissingField {
                row: 1,
                field: f.to_string(),
            });
        }
    }
    let mut ingest = Ingest::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| CorpusError::Malformed {
            row,
            message: e.to_string(),
        })?;
        let field = |name: &str| rec.get(index[name]).unwrap_or_default().to_string();
        let mut extra = BTreeMap::new();
        for (j, h) in headers.iter().enumerate() {
            if REQUIRED_FIELDS.contains(&h) {
                continue;
            }
            let v = rec.get(j).unwrap_or_default();
            if !v.is_empty() {
                extra.insert(h.to_string(), v.to_string());
            }
        }
        ingest.push(
            row,
            Review {
                id: field("id"),
                app_id: field("app_id"),
                app_category: field("app_category"),
                text: field("text"),
                source: field("source"),
                extra,
            },
        )?;
    }
    Ok(ingest.finish())
}

pub fn read_jsonl<R: BufRead>(reader: R) -> Result<LoadOutcome, CorpusError> {
    let mut ingest = Ingest::new();
    for (i, line) in reader.lines().enumerate() {
        let row = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let obj: Map<String, Value> = serde_json::from_str(&line).map_err(|e| CorpusError::Malformed {
            row,
            message: e.to_string(),
        })?;
        let mut fixed = BTreeMap::new();
        let mut extra = BTreeMap::new();
        for (k, v) in obj {
            if REQUIRED_FIELDS.contains(&k.as_str()) {
                match v {
                    Value::String(s) => {
                        fixed.insert(k, s);
                    }
                    other => {
                        return Err(CorpusError::Malformed {
                            row,
                            message: format!("field `{k}` must be a string, got {other}"),
                        })
                    }
                }
            } else {
                let s = match v {
                    Value::String(s) => s,
                    other => other.to_string(),
                };
                extra.insert(k, s);
            }
        }
        let mut take = |f: &str| {
            fixed.remove(f).ok_or_else(|| CorpusError::MissingField {
                row,
                field: f.to_string(),
            })
        };
        let review = Review {
            id: take("id")?,
            app_id: take("app_id")?,
            app_category: take("app_category")?,
            text: take("text")?,
            source: take("source")?,
            extra,
        };
        ingest.push(row, review)?;
    }
    Ok(ingest.finish())
}

pub fn export_corpus(c: &ReviewCorpus, path: &Path, format: CorpusFormat) -> Result<(), CorpusError> {
    let mut w = BufWriter::new(File::create(path)?);
    match format {
        CorpusFormat::Csv => write_csv(c, &mut w)?,
        CorpusFormat::Jsonl => write_jsonl(c, &mut w)?,
    }
    w.flush()?;
    Ok(())
}

/// Writes the fixed columns followed by the union of `extra` keys, sorted.
pub fn write_csv<W: Write>(c: &ReviewCorpus, out: W) -> Result<(), CorpusError> {
    let extra_keys: BTreeSet<&str> = c
        .reviews
        .iter()
        .flat_map(|r| r.extra.keys().map(String::as_str))
        .collect();
    let mut w = csv::Writer::from_writer(out);
    let to_io = |e: csv::Error| CorpusError::Io(std::io::Error::other(e));
    let header: Vec<&str> = REQUIRED_FIELDS.iter().copied().chain(extra_keys.iter().copied()).collect();
    w.write_record(&header).map_err(to_io)?;
    for r in &c.reviews {
        let mut rec = vec![
            r.id.as_str(),
            r.app_id.as_str(),
            r.app_category.as_str(),
            r.text.as_str(),
            r.source.as_str(),
        ];
        for k in &extra_keys {
            rec.push(r.extra.get(*k).map(String::as_str).unwrap_or(""));
        }
        w.write_record(&rec).map_err(to_io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_jsonl<W: Write>(c: &ReviewCorpus, mut out: W) -> Result<(), CorpusError> {
    for r in &c.reviews {
        let mut obj = Map::new();
        for (k, v) in &r.extra {
            obj.insert(k.clone(), Value::String(v.clone()));
        }
        obj.insert("id".into(), r.id.clone().into());
        obj.insert("app_id".into(), r.app_id.clone().into());
        obj.insert("app_category".into(), r.app_category.clone().into());
        obj.insert("text".into(), r.text.clone().into());
        obj.insert("source".into(), r.source.clone().into());
        serde_json::to_writer(&mut out, &obj).map_err(std::io::Error::other)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CollisionPolicy {
    Error,
    PreferA,
    PreferB,
}

impl FromStr for CollisionPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "error" => Ok(CollisionPolicy::Error),
            "prefer_a" | "prefer-a" => Ok(CollisionPolicy::PreferA),
            "prefer_b" | "prefer-b" => Ok(CollisionPolicy::PreferB),
            other => Err(format!("unknown collision policy {other:?}")),
        }
    }
}

/// Concatenates `a` and `b`. Colliding ids stay at their position in `a`;
/// under `PreferB` the record there is replaced by `b`'s version.
pub fn merge_corpora(
    a: &ReviewCorpus,
    b: &ReviewCorpus,
    collision: CollisionPolicy,
) -> Result<ReviewCorpus, CorpusError> {
    let b_index: HashMap<&str, &Review> = b.reviews.iter().map(|r| (r.id.as_str(), r)).collect();
    let a_ids: HashSet<&str> = a.ids().collect();
    let colliding: Vec<String> = b
        .reviews
        .iter()
        .filter(|r| a_ids.contains(r.id.as_str()))
        .map(|r| r.id.clone())
        .collect();
    if collision == CollisionPolicy::Error && !colliding.is_empty() {
        return Err(CorpusError::Collision { ids: colliding });
    }
    let mut out: Vec<Review> = a
        .reviews
        .iter()
        .map(|r| match (collision, b_index.get(r.id.as_str())) {
            (CollisionPolicy::PreferB, Some(rb)) => (*rb).clone(),
            _ => r.clone(),
        })
        .collect();
    out.extend(b.reviews.iter().filter(|r| !a_ids.contains(r.id.as_str())).cloned());
    ReviewCorpus::new(out)
}

// ---------------------------------------------------------------------------
// Labelled datasets

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Violation,
    NonViolation,
}

impl Label {
    pub fn as_bit(self) -> u8 {
        match self {
            Label::Violation => 1,
            Label::NonViolation => 0,
        }
    }

    pub fn from_bit(bit: u8) -> Self {
        if bit == 1 {
            Label::Violation
        } else {
            Label::NonViolation
        }
    }
}

impl FromStr for Label {
    type Err = String;

    /// Accepts the canonical names as well as `1`/`0`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "violation" | "1" => Ok(Label::Violation),
            "non_violation" | "0" => Ok(Label::NonViolation),
            other => Err(format!("unknown label {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Resolution {
    Agreed,
    Negotiated,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub labeler_id: String,
    pub validator_id: Option<String>,
    pub resolution: Resolution,
    pub round_increment: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LabeledExample {
    pub review_id: String,
    pub label: Label,
    pub categories: BTreeSet<Category>,
    #[serde(flatten)]
    pub provenance: Provenance,
}

#[derive(Debug, Error)]
pub enum LabelError {
    #[error("record {record}: categories given for a non_violation label")]
    CategoriesOnNonViolation { record: String },
    #[error("record {record}: violation label requires at least one category")]
    MissingCategories { record: String },
    #[error("record {record}: round_increment {value} outside 1..=4")]
    BadIncrement { record: String, value: u8 },
    #[error("record {record}: unknown category slug {slug:?}")]
    UnknownCategory { record: String, slug: String },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("line {line}: duplicate review_id {id:?}")]
    Duplicate { line: usize, id: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Checks the label/category coupling shared by datasets and annotation.
pub fn check_label(record: &str, label: Label, categories: &BTreeSet<Category>) -> Result<(), LabelError> {
    match (label, categories.is_empty()) {
        (Label::NonViolation, false) => Err(LabelError::CategoriesOnNonViolation {
            record: record.to_string(),
        }),
        (Label::Violation, true) => Err(LabelError::MissingCategories {
            record: record.to_string(),
        }),
        _ => Ok(()),
    }
}

impl LabeledExample {
    pub fn validate(&self) -> Result<(), LabelError> {
        check_label(&self.review_id, self.label, &self.categories)?;
        if !(1..=4).contains(&self.provenance.round_increment) {
            return Err(LabelError::BadIncrement {
                record: self.review_id.clone(),
                value: self.provenance.round_increment,
            });
        }
        Ok(())
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLabeled {
    review_id: String,
    label: Label,
    categories: Vec<String>,
    labeler_id: String,
    validator_id: Option<String>,
    resolution: Resolution,
    round_increment: u8,
}

pub fn parse_labeled_line(line: &str, line_no: usize) -> Result<LabeledExample, LabelError> {
    let raw: RawLabeled = serde_json::from_str(line).map_err(|e| LabelError::Format {
        line: line_no,
        message: e.to_string(),
    })?;
    let mut categories = BTreeSet::new();
    for slug in raw.categories {
        let c = Category::from_slug(&slug).ok_or_else(|| LabelError::UnknownCategory {
            record: raw.review_id.clone(),
            slug: slug.clone(),
        })?;
        categories.insert(c);
    }
    let ex = LabeledExample {
        review_id: raw.review_id,
        label: raw.label,
        categories,
        provenance: Provenance {
            labeler_id: raw.labeler_id,
            validator_id: raw.validator_id,
            resolution: raw.resolution,
            round_increment: raw.round_increment,
        },
    };
    ex.validate()?;
    Ok(ex)
}

pub fn read_labeled<R: BufRead>(reader: R) -> Result<Vec<LabeledExample>, LabelError> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let ex = parse_labeled_line(&line, i + 1)?;
        if !seen.insert(ex.review_id.clone()) {
            return Err(LabelError::Duplicate {
                line: i + 1,
                id: ex.review_id,
            });
        }
        out.push(ex);
    }
    Ok(out)
}

pub fn load_labeled(path: &Path) -> Result<Vec<LabeledExample>, LabelError> {
    read_labeled(BufReader::new(File::open(path)?))
}

/// One JSON object per line, keys in the fixed field order.
pub fn labeled_to_jsonl(examples: &[LabeledExample]) -> String {
    let mut s = String::new();
    for ex in examples {
        s.push_str(&serde_json::to_string(ex).expect("label serialize"));
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn corpus(ids: &[&str]) -> ReviewCorpus {
        ReviewCorpus::new(ids.iter().map(|id| Review::new(id, "app", "cat", "text", "src")).collect()).unwrap()
    }

    #[test]
    fn three_row_csv() {
        let csv = "id,app_id,app_category,text,source\nr1,a1,games,hello,eler\nr2,a1,games,\"quoted, text\",eler\nr3,a2,games,third,obie\n";
        let out = read_csv(Cursor::new(csv)).unwrap();
        assert_eq!(out.corpus.len(), 3);
        assert_eq!(out.corpus.stats().n_reviews, 3);
        assert_eq!(out.corpus.reviews()[1].text, "quoted, text");
    }

    #[test]
    fn duplicate_id_cites_second_row() {
        let jsonl = [
            r#"{"id":"r1","app_id":"a","app_category":"c","text":"x","source":"s"}"#,
            r#"{"id":"r2","app_id":"a","app_category":"c","text":"x","source":"s"}"#,
            r#"{"id":"r3","app_id":"a","app_category":"c","text":"x","source":"s"}"#,
            r#"{"id":"r4","app_id":"a","app_category":"c","text":"x","source":"s"}"#,
            r#"{"id":"r1","app_id":"a","app_category":"c","text":"x","source":"s"}"#,
        ]
        .join("\n");
        let err = read_jsonl(Cursor::new(jsonl)).unwrap_err();
        match err {
            CorpusError::DuplicateId { row, id, first_row } => {
                assert_eq!((row, id.as_str(), first_row), (5, "r1", 1));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn csv_duplicate_row_numbers_count_header() {
        let csv = "id,app_id,app_category,text,source\nr1,a,c,x,s\nr2,a,c,x,s\nr1,a,c,x,s\n";
        let err = read_csv(Cursor::new(csv)).unwrap_err();
        assert!(matches!(err, CorpusError::DuplicateId { row: 4, first_row: 2, .. }), "{err}");
    }

    #[test]
    fn missing_field_names_row() {
        let jsonl = "{\"id\":\"r1\",\"app_id\":\"a\",\"app_category\":\"c\",\"text\":\"x\",\"source\":\"s\"}\n{\"id\":\"r2\",\"app_id\":\"a\",\"text\":\"x\",\"source\":\"s\"}\n";
        let err = read_jsonl(Cursor::new(jsonl)).unwrap_err();
        assert!(matches!(err, CorpusError::MissingField { row: 2, ref field } if field == "app_category"));
        let csv = "id,app_id,text,source\nr1,a,x,s\n";
        assert!(matches!(read_csv(Cursor::new(csv)), Err(CorpusError::MissingField { row: 1, .. })));
    }

    #[test]
    fn empty_text_skipped_and_reported() {
        let csv = "id,app_id,app_category,text,source\nr1,a,c,hello,s\nr2,a,c,   ,s\n";
        let out = read_csv(Cursor::new(csv)).unwrap();
        assert_eq!(out.corpus.len(), 1);
        assert_eq!(out.skipped, vec![SkippedRow { row: 3, id: "r2".into(), reason: "empty text".into() }]);
    }

    #[test]
    fn unknown_columns_land_in_extra() {
        let csv = "id,app_id,app_category,text,source,rating\nr1,a,c,hello,s,5\n";
        let out = read_csv(Cursor::new(csv)).unwrap();
        assert_eq!(out.corpus.reviews()[0].extra.get("rating").map(String::as_str), Some("5"));
        let jsonl = r#"{"id":"r1","app_id":"a","app_category":"c","text":"x","source":"s","rating":4,"date":"2021"}"#;
        let out = read_jsonl(Cursor::new(jsonl)).unwrap();
        let extra = &out.corpus.reviews()[0].extra;
        assert_eq!(extra["rating"], "4");
        assert_eq!(extra["date"], "2021");
    }

    #[test]
    fn stats_small_cases() {
        assert_eq!(ReviewCorpus::empty().stats(), CorpusStats::default());
        let c = ReviewCorpus::new(vec![
            Review::new("1", "a", "games", "t", "s"),
            Review::new("2", "a", "games", "t", "s"),
            Review::new("3", "b", "games", "t", "s"),
        ])
        .unwrap();
        assert_eq!(
            c.stats(),
            CorpusStats {
                n_reviews: 3,
                n_apps: 2,
                n_categories: 1
            }
        );
    }

    #[test]
    fn merge_disjoint() {
        let a = corpus(&["a1", "a2", "a3", "a4", "a5"]);
        let b = corpus(&["b1", "b2", "b3"]);
        assert_eq!(merge_corpora(&a, &b, CollisionPolicy::Error).unwrap().len(), 8);
    }

    #[test]
    fn merge_prefer_policies() {
        let a = ReviewCorpus::new(vec![Review::new("x", "a", "c", "from a", "A"), Review::new("y", "a", "c", "t", "A")]).unwrap();
        let b = ReviewCorpus::new(vec![Review::new("x", "b", "c", "from b", "B"), Review::new("z", "b", "c", "t", "B")]).unwrap();
        let pa = merge_corpora(&a, &b, CollisionPolicy::PreferA).unwrap();
        assert_eq!(pa.len(), 3);
        assert_eq!(pa.get("x").unwrap().text, "from a");
        let pb = merge_corpora(&a, &b, CollisionPolicy::PreferB).unwrap();
        assert_eq!(pb.len(), 3);
        assert_eq!(pb.get("x").unwrap().text, "from b");
        assert_eq!(pb.reviews()[0].id, "x");
        let err = merge_corpora(&a, &b, CollisionPolicy::Error).unwrap_err();
        assert!(matches!(err, CorpusError::Collision { ref ids } if ids == &vec!["x".to_string()]));
    }

    #[test]
    fn labeled_line_round_trip_and_field_order() {
        let line = r#"{"review_id":"r1","label":"violation","categories":["unfair-fees"],"labeler_id":"a","validator_id":"b","resolution":"agreed","round_increment":1}"#;
        let ex = parse_labeled_line(line, 1).unwrap();
        assert_eq!(labeled_to_jsonl(&[ex]), format!("{line}\n"));
    }

    #[test]
    fn labeled_invariants_enforced() {
        let bad_cat = r#"{"review_id":"r1","label":"non_violation","categories":["unfair-fees"],"labeler_id":"a","validator_id":null,"resolution":"agreed","round_increment":1}"#;
        assert!(matches!(parse_labeled_line(bad_cat, 1), Err(LabelError::CategoriesOnNonViolation { .. })));
        let bad_inc = r#"{"review_id":"r1","label":"non_violation","categories":[],"labeler_id":"a","validator_id":null,"resolution":"agreed","round_increment":5}"#;
        assert!(matches!(parse_labeled_line(bad_inc, 1), Err(LabelError::BadIncrement { .. })));
        let bad_slug = r#"{"review_id":"r7","label":"violation","categories":["nope"],"labeler_id":"a","validator_id":null,"resolution":"agreed","round_increment":1}"#;
        let err = parse_labeled_line(bad_slug, 1).unwrap_err();
        assert!(err.to_string().contains("r7"));
    }
}
