//! Keyword candidate filtering and the five-stage text preprocessing.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Review, ReviewCorpus};

#[derive(Debug, Error)]
pub enum TextprepError {
    #[error("keyword dictionary is empty")]
    EmptyDictionary,
    #[error("invalid preprocessing steps: {0}")]
    InvalidSteps(String),
    #[error("unknown {what} {value:?}")]
    Unknown { what: &'static str, value: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchMode {
    /// The keyword's tokens must appear as consecutive tokens of the
    /// lowercased, punctuation-stripped text.
    #[default]
    Token,
    /// The keyword must occur anywhere in the lowercased text.
    Substring,
}

impl FromStr for MatchMode {
    type Err = TextprepError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "token" => Ok(MatchMode::Token),
            "substring" => Ok(MatchMode::Substring),
            other => Err(TextprepError::Unknown {
                what: "match mode",
                value: other.into(),
            }),
        }
    }
}

impl fmt::Display for MatchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MatchMode::Token => "token",
            MatchMode::Substring => "substring",
        })
    }
}

/// Per-code-point lowercasing. Unlike `str::to_lowercase` it ignores the
/// context-dependent final-sigma rule, so the result of each character does
/// not depend on its neighbours.
pub fn lowercase(text: &str) -> String {
    text.chars().flat_map(char::to_lowercase).collect()
}

/// Reads the one-entry-per-line list format shared by dictionaries and
/// stop-word files: entries are trimmed and lowercased, `#` comments and
/// blank lines are dropped, duplicates keep their first position.
pub fn parse_word_list(text: &str) -> Vec<String> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let w = lowercase(line);
        if seen.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeywordDictionary {
    keywords: Vec<String>,
    pub match_mode: MatchMode,
    // keyword split with the default punctuation rules, for token mode
    token_forms: Vec<Vec<String>>,
}

const DEFAULT_KEYWORDS: &str = include_str!("../data/default_keywords.txt");
const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords_en.txt");

impl KeywordDictionary {
    pub fn new(keywords: Vec<String>, match_mode: MatchMode) -> Result<Self, TextprepError> {
        let keywords = parse_word_list(&keywords.join("\n"));
        if keywords.is_empty() {
            return Err(TextprepError::EmptyDictionary);
        }
        let token_forms = keywords.iter().map(|k| match_tokens(k)).collect();
        Ok(Self {
            keywords,
            match_mode,
            token_forms,
        })
    }

    pub fn parse(text: &str) -> Result<Self, TextprepError> {
        Self::new(parse_word_list(text), MatchMode::Token)
    }

    /// The bundled 48-entry list (a stand-in for the original dictionary).
    pub fn default_honesty() -> Self {
        Self::parse(DEFAULT_KEYWORDS).expect("bundled dictionary is valid")
    }

    pub fn keywords(&self) -> &[String] {
        &self.keywords
    }

    pub fn with_mode(mut self, mode: MatchMode) -> Self {
        self.match_mode = mode;
        self
    }
}

pub fn load_dictionary(path: &Path) -> Result<KeywordDictionary, TextprepError> {
    KeywordDictionary::parse(&std::fs::read_to_string(path)?)
}

fn is_default_punct(c: char) -> bool {
    c.is_ascii_punctuation() || ('\u{2018}'..='\u{201D}').contains(&c) || matches!(c, '\u{2013}' | '\u{2014}' | '\u{2026}')
}

/// Lowercase, replace punctuation with spaces, split on whitespace.
fn match_tokens(text: &str) -> Vec<String> {
    lowercase(text)
        .chars()
        .map(|c| if is_default_punct(c) { ' ' } else { c })
        .collect::<String>()
        .split_whitespace()
        .map(str::to_string)
        .collect()
}

fn contains_run(haystack: &[String], needle: &[String]) -> bool {
    !needle.is_empty() && haystack.windows(needle.len()).any(|w| w == needle)
}

/// Keywords of `d` found in the review, in dictionary order.
pub fn match_keywords(r: &Review, d: &KeywordDictionary) -> Vec<String> {
    match d.match_mode {
        MatchMode::Token => {
            let toks = match_tokens(&r.text);
            d.keywords
                .iter()
                .zip(&d.token_forms)
                .filter(|(_, form)| contains_run(&toks, form))
                .map(|(k, _)| k.clone())
                .collect()
        }
        MatchMode::Substring => {
            let lower = lowercase(&r.text);
            d.keywords.iter().filter(|k| lower.contains(k.as_str())).cloned().collect()
        }
    }
}

pub fn filter_corpus(c: &ReviewCorpus, d: &KeywordDictionary) -> ReviewCorpus {
    c.retain(|r| !match_keywords(r, d).is_empty())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Lowercase,
    StripEmoji,
    StripPunct,
    Tokenize,
    DropStopwords,
}

impl FromStr for Stage {
    type Err = TextprepError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim() {
            "lowercase" => Stage::Lowercase,
            "strip_emoji" => Stage::StripEmoji,
            "strip_punct" => Stage::StripPunct,
            "tokenize" => Stage::Tokenize,
            "drop_stopwords" => Stage::DropStopwords,
            other => {
                return Err(TextprepError::Unknown {
                    what: "preprocessing stage",
                    value: other.into(),
                })
            }
        })
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Lowercase => "lowercase",
            Stage::StripEmoji => "strip_emoji",
            Stage::StripPunct => "strip_punct",
            Stage::Tokenize => "tokenize",
            Stage::DropStopwords => "drop_stopwords",
        })
    }
}

pub const DEFAULT_STEPS: [Stage; 5] = [
    Stage::Lowercase,
    Stage::StripEmoji,
    Stage::StripPunct,
    Stage::Tokenize,
    Stage::DropStopwords,
];

pub const DEFAULT_EMOJI_RANGES: [(u32, u32); 8] = [
    (0x1F300, 0x1F5FF),
    (0x1F600, 0x1F64F),
    (0x1F680, 0x1F6FF),
    (0x1F900, 0x1F9FF),
    (0x2600, 0x26FF),
    (0x2700, 0x27BF),
    (0xFE0E, 0xFE0F),
    (0x200D, 0x200D),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreprocessConfig {
    pub stop_words: BTreeSet<String>,
    pub punctuation: BTreeSet<char>,
    /// Inclusive code-point intervals.
    pub emoji_ranges: Vec<(u32, u32)>,
    steps: Vec<Stage>,
}

pub fn default_stop_words() -> BTreeSet<String> {
    parse_word_list(DEFAULT_STOPWORDS).into_iter().collect()
}

pub fn default_punctuation() -> BTreeSet<char> {
    let mut set: BTreeSet<char> = (0u8..128).map(char::from).filter(char::is_ascii_punctuation).collect();
    set.extend('\u{2018}'..='\u{201D}');
    set.extend(['\u{2013}', '\u{2014}', '\u{2026}']);
    set
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            stop_words: default_stop_words(),
            punctuation: default_punctuation(),
            emoji_ranges: DEFAULT_EMOJI_RANGES.to_vec(),
            steps: DEFAULT_STEPS.to_vec(),
        }
    }
}

impl PreprocessConfig {
    pub fn new(
        stop_words: BTreeSet<String>,
        punctuation: BTreeSet<char>,
        emoji_ranges: Vec<(u32, u32)>,
        steps: Vec<Stage>,
    ) -> Result<Self, TextprepError> {
        check_steps(&steps)?;
        Ok(Self {
            stop_words: stop_words.into_iter().map(|w| lowercase(&w)).collect(),
            punctuation,
            emoji_ranges,
            steps,
        })
    }

    pub fn steps(&self) -> &[Stage] {
        &self.steps
    }

    pub fn with_steps(mut self, steps: Vec<Stage>) -> Result<Self, TextprepError> {
        check_steps(&steps)?;
        self.steps = steps;
        Ok(self)
    }

    pub fn with_stop_words(mut self, words: impl IntoIterator<Item = String>) -> Self {
        self.stop_words = words.into_iter().map(|w| lowercase(&w)).collect();
        self
    }

    fn is_emoji(&self, c: char) -> bool {
        let cp = c as u32;
        self.emoji_ranges.iter().any(|&(lo, hi)| (lo..=hi).contains(&cp))
    }

    /// Short textual description recorded in reports.
    pub fn describe(&self) -> String {
        let steps: Vec<String> = self.steps.iter().map(Stage::to_string).collect();
        format!(
            "steps={} stop_words={} punctuation={} emoji_ranges={}",
            steps.join(">"),
            self.stop_words.len(),
            self.punctuation.len(),
            self.emoji_ranges.len()
        )
    }
}

fn check_steps(steps: &[Stage]) -> Result<(), TextprepError> {
    let unique: BTreeSet<_> = steps.iter().collect();
    if steps.len() != 5 || unique.len() != 5 {
        return Err(TextprepError::InvalidSteps(
            "each of the five stages must appear exactly once".into(),
        ));
    }
    let pos = |s: Stage| steps.iter().position(|&x| x == s).unwrap();
    if pos(Stage::Tokenize) > pos(Stage::DropStopwords) {
        return Err(TextprepError::InvalidSteps("tokenize must precede drop_stopwords".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizedReview {
    pub review_id: String,
    pub tokens: Vec<String>,
}

impl TokenizedReview {
    pub fn n(&self) -> usize {
        self.tokens.len()
    }
}

enum Work {
    Text(String),
    Tokens(Vec<String>),
}

impl Work {
    // Text-level stages applied after tokenization act per token and
    // re-split, so tokens never carry whitespace.
    fn map_text(self, f: impl Fn(&str) -> String) -> Work {
        match self {
            Work::Text(t) => Work::Text(f(&t)),
            Work::Tokens(toks) => Work::Tokens(
                toks.iter()
                    .flat_map(|t| f(t).split_whitespace().map(str::to_string).collect::<Vec<_>>())
                    .collect(),
            ),
        }
    }
}

/// Runs the configured stages over `text`.
pub fn preprocess_text(text: &str, cfg: &PreprocessConfig) -> Vec<String> {
    let mut work = Work::Text(text.to_string());
    for stage in &cfg.steps {
        work = match stage {
            Stage::Lowercase => work.map_text(lowercase),
            Stage::StripEmoji => work.map_text(|t| t.chars().filter(|&c| !cfg.is_emoji(c)).collect()),
            Stage::StripPunct => work.map_text(|t| {
                t.chars()
                    .map(|c| if cfg.punctuation.contains(&c) { ' ' } else { c })
                    .collect()
            }),
            Stage::Tokenize => match work {
                Work::Text(t) => Work::Tokens(t.split_whitespace().map(str::to_string).collect()),
                tokens => tokens,
            },
            Stage::DropStopwords => match work {
                Work::Tokens(toks) => Work::Tokens(toks.into_iter().filter(|t| !cfg.stop_words.contains(t)).collect()),
                Work::Text(_) => unreachable!("tokenize precedes drop_stopwords"),
            },
        };
    }
    match work {
        Work::Tokens(t) => t,
        Work::Text(t) => t.split_whitespace().map(str::to_string).collect(),
    }
}

pub fn preprocess(r: &Review, cfg: &PreprocessConfig) -> TokenizedReview {
    TokenizedReview {
        review_id: r.id.clone(),
        tokens: preprocess_text(&r.text, cfg),
    }
}
