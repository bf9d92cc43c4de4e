//! Review embeddings.
//!
//! Three providers produce a fixed-dimension vector per review:
//!
//! * `word_table` averages per-word vectors from a table file, skipping
//!   out-of-vocabulary tokens;
//! * `hashed` is a seeded feature-hashing featurizer needing no external
//!   files;
//! * `precomputed` reads vectors produced elsewhere (for example by a
//!   transformer encoder) from JSONL.
//!
//! # Hashed featurizer
//!
//! For each token `t` with UTF-8 bytes `b`:
//!
//! ```text
//! z     = splitmix64(fnv1a64(b) XOR seed)
//! index = (z & 0x7fff_ffff_ffff_ffff) mod dim
//! sign  = -1 if (z >> 63) == 1 else +1
//! ```
//!
//! Component `i` is the sum of signs of tokens hashed to `i`, divided by the
//! token count. See [`crate::seed`] for the two hash functions.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::corpus::ReviewCorpus;
use crate::seed::{fnv1a64, splitmix64};
use crate::textprep::{preprocess, PreprocessConfig, TokenizedReview};

pub const DEFAULT_DIM: usize = 768;

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("line {line}: expected {expected} components, found {found}")]
    Dimension { line: usize, expected: usize, found: usize },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("line {line}: duplicate entry {key:?}")]
    Duplicate { line: usize, key: String },
    #[error("dimension must be positive")]
    ZeroDim,
    #[error("no precomputed vector for {} review(s): {}", .0.len(), .0.join(", "))]
    MissingIds(Vec<String>),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct WordVectorTable {
    dim: usize,
    entries: HashMap<String, Vec<f64>>,
}

impl WordVectorTable {
    pub fn new(dim: usize, entries: HashMap<String, Vec<f64>>) -> Result<Self, EmbedError> {
        if dim == 0 {
            return Err(EmbedError::ZeroDim);
        }
        for (k, v) in &entries {
            if v.len() != dim {
                return Err(EmbedError::Dimension {
                    line: 0,
                    expected: dim,
                    found: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(EmbedError::Format {
                    line: 0,
                    message: format!("non-finite component for {k:?}"),
                });
            }
        }
        Ok(Self { dim, entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.entries.get(word).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// SHA-256 over the sorted entries; used in featurizer fingerprints.
    pub fn digest(&self) -> String {
        let sorted: BTreeMap<_, _> = self.entries.iter().collect();
        let mut h = Sha256::new();
        h.update((self.dim as u64).to_le_bytes());
        for (w, v) in sorted {
            h.update(w.as_bytes());
            h.update([0]);
            for x in v {
                h.update(x.to_bits().to_le_bytes());
            }
        }
        hex(&h.finalize())
    }

    /// Reads `word<TAB>c1 c2 ... cd` lines. `dim` is checked when given,
    /// otherwise taken from the first line.
    pub fn load(path: &Path, dim: Option<usize>) -> Result<Self, EmbedError> {
        Self::read(BufReader::new(File::open(path)?), dim)
    }

    pub fn read<R: BufRead>(reader: R, dim: Option<usize>) -> Result<Self, EmbedError> {
        let mut dim = dim;
        let mut entries = HashMap::new();
        for (i, line) in reader.lines().enumerate() {
            let line_no = i + 1;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let (word, rest) = line.split_once('\t').ok_or_else(|| EmbedError::Format {
                line: line_no,
                message: "expected word<TAB>components".into(),
            })?;
            let v = parse_components(rest.split_whitespace(), line_no)?;
            let d = *dim.get_or_insert(v.len());
            if v.len() != d {
                return Err(EmbedError::Dimension {
                    line: line_no,
                    expected: d,
                    found: v.len(),
                });
            }
            if entries.insert(word.to_string(), v).is_some() {
                return Err(EmbedError::Duplicate {
                    line: line_no,
                    key: word.to_string(),
                });
            }
        }
        Self::new(dim.unwrap_or(DEFAULT_DIM), entries)
    }
}

fn parse_components<'a>(parts: impl Iterator<Item = &'a str>, line: usize) -> Result<Vec<f64>, EmbedError> {
    parts
        .map(|p| {
            p.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| EmbedError::Format {
                    line,
                    message: format!("bad component {p:?}"),
                })
        })
        .collect()
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderKind {
    WordTable,
    Hashed,
    Precomputed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReviewVector {
    pub review_id: String,
    pub vector: Vec<f64>,
    pub n_known: usize,
    pub provider: ProviderKind,
    /// Set when no token contributed and the vector is all zeros.
    pub no_known_tokens: bool,
}

/// Mean of the table vectors of the tokens found in `w`.
///
/// Uses the running-mean update `m += (x - m) / k`, so a set of identical
/// vectors averages to exactly that vector.
pub fn embed_average(t: &TokenizedReview, w: &WordVectorTable) -> ReviewVector {
    let mut mean = vec![0.0; w.dim];
    let mut k = 0usize;
    for tok in &t.tokens {
        if let Some(v) = w.get(tok) {
            k += 1;
            if k == 1 {
                mean.copy_from_slice(v);
            } else {
                let kf = k as f64;
                for (m, x) in mean.iter_mut().zip(v) {
                    *m += (x - *m) / kf;
                }
            }
        }
    }
    ReviewVector {
        review_id: t.review_id.clone(),
        vector: mean,
        n_known: k,
        provider: ProviderKind::WordTable,
        no_known_tokens: k == 0,
    }
}

/// Bucket and sign of one token under the documented hash.
pub fn hash_token(token: &str, dim: usize, seed: u64) -> (usize, f64) {
    let z = splitmix64(fnv1a64(token.as_bytes()) ^ seed);
    let index = ((z & 0x7fff_ffff_ffff_ffff) % dim as u64) as usize;
    let sign = if z >> 63 == 1 { -1.0 } else { 1.0 };
    (index, sign)
}

pub fn embed_hashed(t: &TokenizedReview, dim: usize, seed: u64) -> ReviewVector {
    assert!(dim >= 1, "dim must be positive");
    let mut counts = vec![0i64; dim];
    for tok in &t.tokens {
        let (i, s) = hash_token(tok, dim, seed);
        counts[i] += s as i64;
    }
    let n = t.tokens.len();
    let vector = if n == 0 {
        vec![0.0; dim]
    } else {
        counts.iter().map(|&c| c as f64 / n as f64).collect()
    };
    ReviewVector {
        review_id: t.review_id.clone(),
        vector,
        n_known: n,
        provider: ProviderKind::Hashed,
        no_known_tokens: n == 0,
    }
}

#[derive(Serialize, Deserialize)]
struct PrecomputedRow {
    id: String,
    vector: Vec<f64>,
}

pub fn read_precomputed<R: BufRead>(reader: R, dim: usize) -> Result<BTreeMap<String, ReviewVector>, EmbedError> {
    let mut out = BTreeMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row: PrecomputedRow = serde_json::from_str(&line).map_err(|e| EmbedError::Format {
            line: line_no,
            message: e.to_string(),
        })?;
        if row.vector.len() != dim {
            return Err(EmbedError::Dimension {
                line: line_no,
                expected: dim,
                found: row.vector.len(),
            });
        }
        if out.contains_key(&row.id) {
            return Err(EmbedError::Duplicate {
                line: line_no,
                key: row.id,
            });
        }
        out.insert(
            row.id.clone(),
            ReviewVector {
                review_id: row.id,
                vector: row.vector,
                n_known: 0,
                provider: ProviderKind::Precomputed,
                no_known_tokens: false,
            },
        );
    }
    Ok(out)
}

pub fn load_precomputed(path: &Path, dim: usize) -> Result<BTreeMap<String, ReviewVector>, EmbedError> {
    read_precomputed(BufReader::new(File::open(path)?), dim)
}

/// Writes `{"id":..,"vector":[..]}` rows in input order.
pub fn write_precomputed<W: Write>(vectors: &[ReviewVector], mut out: W) -> Result<(), EmbedError> {
    for v in vectors {
        let row = PrecomputedRow {
            id: v.review_id.clone(),
            vector: v.vector.clone(),
        };
        serde_json::to_writer(&mut out, &row).map_err(std::io::Error::other)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProviderConfig {
    WordTable(WordVectorTable),
    Hashed { dim: usize, seed: u64 },
    Precomputed { dim: usize, vectors: BTreeMap<String, ReviewVector> },
}

impl ProviderConfig {
    pub fn dim(&self) -> usize {
        match self {
            ProviderConfig::WordTable(t) => t.dim(),
            ProviderConfig::Hashed { dim, .. } | ProviderConfig::Precomputed { dim, .. } => *dim,
        }
    }

    pub fn kind(&self) -> ProviderKind {
        match self {
            ProviderConfig::WordTable(_) => ProviderKind::WordTable,
            ProviderConfig::Hashed { .. } => ProviderKind::Hashed,
            ProviderConfig::Precomputed { .. } => ProviderKind::Precomputed,
        }
    }

    /// Identifies the featurizer so models refuse mismatched inputs.
    pub fn fingerprint(&self) -> Fingerprint {
        let descriptor = match self {
            ProviderConfig::WordTable(t) => format!("word_table:sha256={}", t.digest()),
            ProviderConfig::Hashed { dim, seed } => format!("hashed:dim={dim}:seed={seed}"),
            ProviderConfig::Precomputed { dim, .. } => format!("precomputed:dim={dim}"),
        };
        Fingerprint {
            descriptor,
            dim: self.dim(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub descriptor: String,
    pub dim: usize,
}

impl Fingerprint {
    /// Fingerprint for features that did not come from a provider.
    pub fn raw(dim: usize) -> Self {
        Self {
            descriptor: format!("raw:dim={dim}"),
            dim,
        }
    }
}

pub fn embed_tokens(tokens: &[TokenizedReview], provider: &ProviderConfig) -> Result<Vec<ReviewVector>, EmbedError> {
    if let ProviderConfig::Precomputed { vectors, .. } = provider {
        let missing: Vec<String> = tokens
            .iter()
            .filter(|t| !vectors.contains_key(&t.review_id))
            .map(|t| t.review_id.clone())
            .collect();
        if !missing.is_empty() {
            return Err(EmbedError::MissingIds(missing));
        }
    }
    Ok(tokens
        .par_iter()
        .map(|t| match provider {
            ProviderConfig::WordTable(table) => embed_average(t, table),
            ProviderConfig::Hashed { dim, seed } => embed_hashed(t, *dim, *seed),
            ProviderConfig::Precomputed { vectors, .. } => vectors[&t.review_id].clone(),
        })
        .collect())
}

/// Preprocesses and embeds every review, preserving corpus order.
pub fn embed_corpus(
    c: &ReviewCorpus,
    cfg: &PreprocessConfig,
    provider: &ProviderConfig,
) -> Result<Vec<ReviewVector>, EmbedError> {
    let tokens: Vec<TokenizedReview> = c.reviews().par_iter().map(|r| preprocess(r, cfg)).collect();
    embed_tokens(&tokens, provider)
}
