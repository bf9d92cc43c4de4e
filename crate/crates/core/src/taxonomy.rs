//! The ten honesty-violation categories and their frequency statistics.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Label, LabeledExample};

#[derive(Debug, Error)]
pub enum TaxonomyError {
    #[error("record {record}: unknown category slug {slug:?}")]
    UnknownCategory { record: String, slug: String },
    #[error("record {record}: violation label without any category")]
    MissingCategory { record: String },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("category definitions must cover all 10 categories exactly once: {0}")]
    Incomplete(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One of the ten canonical violation categories.
///
/// The declaration order is the reporting order used everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Category {
    UnfairCancellationRefund,
    FalseAdvertisement,
    DelusiveSubscription,
    CheatingSystem,
    InaccurateInformation,
    UnfairFees,
    NoService,
    DeletionOfReviews,
    Impersonation,
    FraudulentLooking,
}

impl Category {
    pub const ALL: [Category; 10] = [
        Category::UnfairCancellationRefund,
        Category::FalseAdvertisement,
        Category::DelusiveSubscription,
        Category::CheatingSystem,
        Category::InaccurateInformation,
        Category::UnfairFees,
        Category::NoService,
        Category::DeletionOfReviews,
        Category::Impersonation,
        Category::FraudulentLooking,
    ];

    pub fn slug(self) -> &'static str {
        match self {
            Category::UnfairCancellationRefund => "unfair-cancellation-refund",
            Category::FalseAdvertisement => "false-advertisement",
            Category::DelusiveSubscription => "delusive-subscription",
            Category::CheatingSystem => "cheating-system",
            Category::InaccurateInformation => "inaccurate-information",
            Category::UnfairFees => "unfair-fees",
            Category::NoService => "no-service",
            Category::DeletionOfReviews => "deletion-of-reviews",
            Category::Impersonation => "impersonation",
            Category::FraudulentLooking => "fraudulent-looking",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Category::UnfairCancellationRefund => "Unfair cancellation and refund policies",
            Category::FalseAdvertisement => "False advertisements",
            Category::DelusiveSubscription => "Delusive subscriptions",
            Category::CheatingSystem => "Cheating systems",
            Category::InaccurateInformation => "Inaccurate information",
            Category::UnfairFees => "Unfair fees",
            Category::NoService => "No service",
            Category::DeletionOfReviews => "Deletion of reviews",
            Category::Impersonation => "Impersonation",
            Category::FraudulentLooking => "Fraudulent-looking apps",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_slug(slug: &str) -> Option<Category> {
        Category::ALL.into_iter().find(|c| c.slug() == slug)
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.slug())
    }
}

impl FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Category::from_slug(s).ok_or_else(|| format!("unknown category slug {s:?}"))
    }
}

/// Row of the category definition file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryDefinition {
    pub slug: Category,
    pub display_name: String,
    pub definition: String,
}

const DEFAULT_DEFINITIONS: &str = include_str!("../data/categories.jsonl");

/// Definitions shipped with the crate.
pub fn default_definitions() -> Vec<CategoryDefinition> {
    parse_definitions(DEFAULT_DEFINITIONS).expect("bundled category file is valid")
}

pub fn load_definitions(path: &Path) -> Result<Vec<CategoryDefinition>, TaxonomyError> {
    parse_definitions(&std::fs::read_to_string(path)?)
}

/// Parses a JSONL definition file. The result is in canonical category order
/// and must mention every category exactly once.
pub fn parse_definitions(text: &str) -> Result<Vec<CategoryDefinition>, TaxonomyError> {
    let mut by_cat = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let def: CategoryDefinition = serde_json::from_str(line).map_err(|e| TaxonomyError::Format {
            line: i + 1,
            message: e.to_string(),
        })?;
        if by_cat.insert(def.slug, def).is_some() {
            return Err(TaxonomyError::Incomplete(format!("duplicate entry on line {}", i + 1)));
        }
    }
    if by_cat.len() != Category::ALL.len() {
        let missing: Vec<_> = Category::ALL
            .iter()
            .filter(|c| !by_cat.contains_key(c))
            .map(|c| c.slug())
            .collect();
        return Err(TaxonomyError::Incomplete(format!("missing {}", missing.join(", "))));
    }
    Ok(by_cat.into_values().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryFrequency {
    pub category: Category,
    pub count: usize,
    /// `100 * count / n_violations`, absent when there are no violations.
    pub raw_percentage: Option<f64>,
    /// Presentation rounding of `raw_percentage`, see [`round_percentage`].
    pub percentage: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaxonomyStats {
    pub n_violations: usize,
    pub multi_label_rows: usize,
    pub categories: Vec<CategoryFrequency>,
}

impl TaxonomyStats {
    pub fn count(&self, c: Category) -> usize {
        self.categories[c.index()].count
    }

    pub fn percentage(&self, c: Category) -> Option<f64> {
        self.categories[c.index()].percentage
    }

    pub fn percentages_defined(&self) -> bool {
        self.n_violations > 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("stats serialize")
    }

    /// `48 (12%)`-style cells, in canonical order.
    pub fn render_cells(&self) -> Vec<String> {
        self.categories
            .iter()
            .map(|f| match f.percentage {
                Some(p) => format!("{} ({}%)", f.count, format_percentage(p)),
                None => format!("{} (n/a)", f.count),
            })
            .collect()
    }
}

/// Nearest integer, except that values in `[1, 2)` keep one decimal.
pub fn round_percentage(p: f64) -> f64 {
    if (1.0..2.0).contains(&p) {
        (p * 10.0).round() / 10.0
    } else {
        p.round()
    }
}

pub fn format_percentage(p: f64) -> String {
    if p.fract() == 0.0 {
        format!("{p:.0}")
    } else {
        format!("{p:.1}")
    }
}

/// Counts category memberships over the violation-labelled examples.
pub fn compute_frequencies(labels: &[LabeledExample]) -> Result<TaxonomyStats, TaxonomyError> {
    let mut counts = [0usize; 10];
    let mut n_violations = 0;
    let mut multi = 0;
    for ex in labels {
        if ex.label != Label::Violation {
            continue;
        }
        if ex.categories.is_empty() {
            return Err(TaxonomyError::MissingCategory {
                record: ex.review_id.clone(),
            });
        }
        n_violations += 1;
        if ex.categories.len() > 1 {
            multi += 1;
        }
        for c in &ex.categories {
            counts[c.index()] += 1;
        }
    }
    let categories = Category::ALL
        .iter()
        .map(|&category| {
            let count = counts[category.index()];
            let raw = (n_violations > 0).then(|| 100.0 * count as f64 / n_violations as f64);
            CategoryFrequency {
                category,
                count,
                raw_percentage: raw,
                percentage: raw.map(round_percentage),
            }
        })
        .collect();
    Ok(TaxonomyStats {
        n_violations,
        multi_label_rows: multi,
        categories,
    })
}

/// Per-category keyword sets for [`suggest_categories`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SuggestionRules {
    pub rules: BTreeMap<Category, Vec<String>>,
}

const DEFAULT_RULES: &str = include_str!("../data/suggest_rules.txt");

impl SuggestionRules {
    pub fn starter() -> Self {
        Self::parse(DEFAULT_RULES).expect("bundled rules are valid")
    }

    pub fn load(path: &Path) -> Result<Self, TaxonomyError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// `slug = word, word` lines; `#` comments and blank lines skipped.
    pub fn parse(text: &str) -> Result<Self, TaxonomyError> {
        let mut rules: BTreeMap<Category, Vec<String>> = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (slug, words) = line.split_once('=').ok_or_else(|| TaxonomyError::Format {
                line: i + 1,
                message: "expected `slug = words`".into(),
            })?;
            let slug = slug.trim();
            let cat = Category::from_slug(slug).ok_or_else(|| TaxonomyError::UnknownCategory {
                record: format!("line {}", i + 1),
                slug: slug.to_string(),
            })?;
            let entry = rules.entry(cat).or_default();
            for w in words.split(',').map(|w| w.trim().to_lowercase()) {
                if !w.is_empty() && !entry.contains(&w) {
                    entry.push(w);
                }
            }
        }
        Ok(Self { rules })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Suggestion {
    pub category: Category,
    pub hits: usize,
}

/// Ranks categories by the number of tokens that appear in their rule set.
/// Ties keep canonical order; categories without hits are omitted.
pub fn suggest_categories(tokens: &[String], rules: &SuggestionRules) -> Vec<Suggestion> {
    let mut out: Vec<Suggestion> = rules
        .rules
        .iter()
        .map(|(&category, words)| Suggestion {
            category,
            hits: tokens.iter().filter(|t| words.iter().any(|w| w == *t)).count(),
        })
        .filter(|s| s.hits > 0)
        .collect();
    out.sort_by(|a, b| b.hits.cmp(&a.hits).then(a.category.cmp(&b.category)));
    out
}
