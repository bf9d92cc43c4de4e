//! Shared inputs for the criterion benchmarks.

use candor_core::synth::labeled_corpus;
use candor_core::{KeywordDictionary, ReviewCorpus};

/// Labelled synthetic reviews, the same generator the demo fixtures use.
pub fn bench_corpus(n: usize) -> ReviewCorpus {
    labeled_corpus(n, KeywordDictionary::default_honesty().keywords(), 7)
}
