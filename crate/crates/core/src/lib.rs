//! Detection of honesty violations in app reviews.
//!
//! The crate covers the whole offline pipeline: review corpus ingestion,
//! keyword candidate filtering and text preprocessing, review embeddings,
//! six from-scratch binary learners, cross-validated evaluation with a
//! random-classifier baseline, the ten-category violation taxonomy, and the
//! state machine behind the two-analyst annotation protocol.
//!
//! All stochastic behaviour is driven by explicit `u64` seeds; identical
//! inputs and seeds give bit-identical outputs.

pub mod annotate;
pub mod corpus;
pub mod embed;
pub mod eval;
pub mod learners;
pub mod seed;
pub mod synth;
pub mod taxonomy;
pub mod textprep;

pub use corpus::{Label, LabeledExample, Review, ReviewCorpus};
pub use embed::{ProviderConfig, ReviewVector, WordVectorTable};
pub use eval::{BaselineReport, ConfusionMatrix, FoldPlan, MetricScores, MetricsReport};
pub use learners::{FeatureMatrix, HyperParams, ModelKind, Prediction, TrainedModel};
pub use taxonomy::{Category, TaxonomyStats};
pub use textprep::{KeywordDictionary, PreprocessConfig, TokenizedReview};
