//! Deterministic synthetic fixtures used by tests, benchmarks and the CLI's
//! `--synthetic` inputs.

use std::collections::BTreeSet;

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::corpus::{Label, LabeledExample, Provenance, Resolution, Review, ReviewCorpus};
use crate::learners::{FeatureMatrix, FeatureRow};
use crate::seed::{derive_seed, rng};
use crate::taxonomy::Category;

/// Category counts of the reference violation set, in canonical order.
pub const REFERENCE_COUNTS: [usize; 10] = [48, 55, 33, 93, 15, 106, 64, 6, 9, 29];
pub const REFERENCE_VIOLATIONS: usize = 401;

const FILLER: &[&str] = &[
    "app", "update", "screen", "version", "phone", "button", "login", "game", "level", "account", "page", "today",
    "again", "after", "every", "time", "use", "open", "slow", "fast", "new", "old", "menu", "settings", "photo",
    "music", "map", "chat", "friend", "week", "month", "day", "night", "works", "crash", "load", "the", "this",
    "is", "and", "it", "my", "when", "so", "very",
];

const BAD: &[&str] = &[
    "charged", "money", "refund", "stole", "without", "permission", "trick", "subscription", "cancel", "billing",
    "misleading", "advertised", "fake", "ads", "pay",
];

const GOOD: &[&str] = &[
    "love", "great", "easy", "helpful", "smooth", "recommend", "nice", "clean", "fun", "useful", "perfect",
    "thanks", "simple", "quick",
];

/// Two Gaussian blobs with unit variance centred at `-offset` and `+offset`
/// on every axis; `n_per_class` rows each, class 0 first.
pub fn two_blobs(n_per_class: usize, dim: usize, offset: f64, seed: u64) -> FeatureMatrix {
    let mut r = rng(derive_seed(seed, "blobs", 0));
    let mut rows = Vec::with_capacity(2 * n_per_class);
    for y in 0..2u8 {
        let centre = if y == 1 { offset } else { -offset };
        for i in 0..n_per_class {
            let x = (0..dim)
                .map(|_| centre + <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut r))
                .collect();
            rows.push(FeatureRow {
                id: format!("b{y}-{i:04}"),
                x,
                y,
            });
        }
    }
    FeatureMatrix::new(dim, rows).expect("blob rows share a dimension")
}

fn words(r: &mut impl Rng, pool: &[&str], n: usize) -> Vec<String> {
    (0..n).map(|_| pool.choose(r).expect("non-empty pool").to_string()).collect()
}

fn mangle_case(r: &mut impl Rng, w: &str) -> String {
    match r.random_range(0..4) {
        0 => w.to_uppercase(),
        1 => {
            let mut c = w.chars();
            c.next()
                .map(|f| f.to_uppercase().chain(c).collect())
                .unwrap_or_default()
        }
        _ => w.to_string(),
    }
}

/// Filler reviews where roughly `plant_rate` of them carry one or two
/// keywords (random case, sometimes followed by punctuation). Some reviews
/// carry near-miss words that embed a keyword inside a longer token.
pub fn planted_corpus(n: usize, keywords: &[String], plant_rate: f64, seed: u64) -> ReviewCorpus {
    let mut r = rng(derive_seed(seed, "planted", 0));
    let reviews = (0..n)
        .map(|i| {
            let len = r.random_range(4..16);
            let mut toks = words(&mut r, FILLER, len);
            if !keywords.is_empty() && r.random_bool(plant_rate) {
                for _ in 0..r.random_range(1..3) {
                    let kw = keywords.choose(&mut r).expect("non-empty");
                    let mut w = mangle_case(&mut r, kw);
                    if r.random_bool(0.3) {
                        w.push_str(["!", ",", "...", "?"].choose(&mut r).expect("non-empty"));
                    }
                    let at = r.random_range(0..=toks.len());
                    toks.insert(at, w);
                }
            }
            if !keywords.is_empty() && r.random_bool(0.1) {
                let kw = keywords.choose(&mut r).expect("non-empty");
                let at = r.random_range(0..=toks.len());
                toks.insert(at, format!("{}zz", kw.replace([' ', '-'], "")));
            }
            Review::new(
                &format!("p{i:05}"),
                &format!("app{}", i % 37),
                "Tools",
                &toks.join(" "),
                "synthetic",
            )
        })
        .collect();
    ReviewCorpus::new(reviews).expect("generated ids are unique")
}

/// Reviews carrying a `label` extra field (`1`/`0`), alternating classes.
/// Every text contains at least one keyword; violations lean on complaint
/// vocabulary and non-violations on praise.
pub fn labeled_corpus(n: usize, keywords: &[String], seed: u64) -> ReviewCorpus {
    let mut r = rng(derive_seed(seed, "labeled", 0));
    let reviews = (0..n)
        .map(|i| {
            let y = i % 2 == 0;
            let n_fill = r.random_range(3..9);
            let mut toks = words(&mut r, FILLER, n_fill);
            let pool = if y { BAD } else { GOOD };
            let n_pool = r.random_range(2..6);
            toks.extend(words(&mut r, pool, n_pool));
            if r.random_bool(0.15) {
                let other = if y { GOOD } else { BAD };
                toks.extend(words(&mut r, other, 1));
            }
            let kw = keywords.choose(&mut r).map_or("honest", |s| s.as_str());
            let at = r.random_range(0..=toks.len());
            toks.insert(at, kw.to_string());
            let mut review = Review::new(
                &format!("s{i:05}"),
                &format!("app{}", i % 53),
                ["Finance", "Games", "Social", "Tools"][i % 4],
                &toks.join(" "),
                "synthetic",
            );
            review.extra.insert("label".into(), if y { "1" } else { "0" }.into());
            review
        })
        .collect();
    ReviewCorpus::new(reviews).expect("generated ids are unique")
}

/// `n` reviews spread over `n_apps` apps, app `j` belonging to category
/// `j % n_categories`.
pub fn app_corpus(n: usize, n_apps: usize, n_categories: usize) -> ReviewCorpus {
    let reviews = (0..n)
        .map(|i| {
            let app = i % n_apps;
            Review::new(
                &format!("a{i:06}"),
                &format!("app{app:04}"),
                &format!("category{:02}", app % n_categories),
                "fine",
                "synthetic",
            )
        })
        .collect();
    ReviewCorpus::new(reviews).expect("generated ids are unique")
}

fn provenance() -> Provenance {
    Provenance {
        labeler_id: "analyst-1".into(),
        validator_id: Some("analyst-2".into()),
        resolution: Resolution::Agreed,
        round_increment: 1,
    }
}

/// Violation examples whose category memberships follow `counts`: a cursor
/// walks the example indices cyclically and category `c` takes the next
/// `counts[c]` of them. With more memberships than examples, the first ones
/// wrap around and carry several categories.
pub fn category_fixture(n: usize, counts: &[usize; 10]) -> Vec<LabeledExample> {
    let mut sets = vec![BTreeSet::new(); n];
    let mut cursor = 0;
    for (c, &k) in Category::ALL.iter().zip(counts) {
        for _ in 0..k {
            sets[cursor % n].insert(*c);
            cursor += 1;
        }
    }
    sets.into_iter()
        .enumerate()
        .map(|(i, categories)| LabeledExample {
            review_id: format!("v{i:04}"),
            label: Label::Violation,
            categories,
            provenance: provenance(),
        })
        .collect()
}

pub fn reference_violations() -> Vec<LabeledExample> {
    category_fixture(REFERENCE_VIOLATIONS, &REFERENCE_COUNTS)
}

/// Random multi-label examples; about a third are non-violations.
pub fn random_labeled(n: usize, seed: u64) -> Vec<LabeledExample> {
    let mut r = rng(derive_seed(seed, "random-labeled", 0));
    (0..n)
        .map(|i| {
            let violation = r.random_bool(2.0 / 3.0);
            let mut categories = BTreeSet::new();
            if violation {
                while categories.is_empty() {
                    for c in Category::ALL {
                        if r.random_bool(0.2) {
                            categories.insert(c);
                        }
                    }
                }
            }
            LabeledExample {
                review_id: format!("m{i:04}"),
                label: if violation { Label::Violation } else { Label::NonViolation },
                categories,
                provenance: provenance(),
            }
        })
        .collect()
}
