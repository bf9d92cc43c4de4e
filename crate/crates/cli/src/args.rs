use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "candor", version, about = "Honesty-violation detection for app reviews")]
pub struct Cli {
    /// Flat `key = value` file; keys are long flag names. Flags given on the
    /// command line win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load one or more corpora, merge them and write the result
    Ingest(IngestArgs),
    /// Keep reviews matching at least one dictionary keyword
    Filter(FilterArgs),
    /// Write token lists for every review
    Preprocess(PreprocessArgs),
    /// Write one vector per review
    Embed(EmbedArgs),
    /// Fit one model on all labelled rows and save it
    Train(TrainArgs),
    /// Cross-validate (and optionally grid-search) one or more models
    Evaluate(EvaluateArgs),
    /// Compare model metrics against a random classifier
    CompareBaseline(BaselineArgs),
    /// Score reviews with a saved model
    Predict(PredictArgs),
    /// Category frequencies of a labelled dataset
    TaxonomyStats(TaxonomyArgs),
    /// Run the annotation service
    Serve(ServeArgs),
    /// ingest, filter, preprocess, embed, grid-search, evaluate, report
    Pipeline(PipelineArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Ingest(_) => "ingest",
            Command::Filter(_) => "filter",
            Command::Preprocess(_) => "preprocess",
            Command::Embed(_) => "embed",
            Command::Train(_) => "train",
            Command::Evaluate(_) => "evaluate",
            Command::CompareBaseline(_) => "compare-baseline",
            Command::Predict(_) => "predict",
            Command::TaxonomyStats(_) => "taxonomy-stats",
            Command::Serve(_) => "serve",
            Command::Pipeline(_) => "pipeline",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputFormat {
    Auto,
    Csv,
    Jsonl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provider {
    Hashed,
    WordTable,
    Precomputed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Collision {
    Error,
    PreferA,
    PreferB,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Match {
    Token,
    Substring,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Seed for every stochastic step
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Report format on stdout
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CorpusIn {
    /// Review corpus (CSV or JSONL)
    #[arg(long = "in", value_name = "PATH")]
    #[serde(rename = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = InputFormat::Auto)]
    pub input_format: InputFormat,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DictArgs {
    /// `default` or a word-list file
    #[arg(long, default_value = "default")]
    pub dict: String,
    #[serde(rename = "match")]
    #[arg(long = "match", value_enum, default_value_t = Match::Token)]
    pub match_mode: Match,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PrepArgs {
    /// `default`, `none` or a word-list file
    #[arg(long, default_value = "default")]
    pub stopwords: String,
    /// Stage order, comma separated
    #[arg(long, default_value = "lowercase,strip_emoji,strip_punct,tokenize,drop_stopwords")]
    pub steps: String,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ProviderArgs {
    #[arg(long, value_enum, default_value_t = Provider::Hashed)]
    pub provider: Provider,
    /// Vector dimension [default: 768 for hashed, else taken from the file
    /// or the model]
    #[arg(long)]
    pub dim: Option<usize>,
    /// Word-vector table or precomputed review vectors
    #[arg(long, value_name = "PATH")]
    pub vectors: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LabelArgs {
    /// Labelled dataset (JSONL); defaults to each review's `label` field
    #[arg(long, value_name = "PATH")]
    pub labels: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct IngestArgs {
    #[command(flatten)]
    pub common: Common,
    /// Input corpora, merged in order
    #[arg(long = "in", value_name = "PATH", required = true)]
    #[serde(rename = "in")]
    pub inputs: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = InputFormat::Auto)]
    pub input_format: InputFormat,
    #[arg(long, value_enum, default_value_t = Collision::Error)]
    pub collision: Collision,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FilterArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub corpus: CorpusIn,
    #[command(flatten)]
    pub dict: DictArgs,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PreprocessArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub corpus: CorpusIn,
    #[command(flatten)]
    pub prep: PrepArgs,
    /// Token lists as JSONL; stdout when absent
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EmbedArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub corpus: CorpusIn,
    #[command(flatten)]
    pub prep: PrepArgs,
    #[command(flatten)]
    pub provider: ProviderArgs,
    /// Review vectors as JSONL; stdout when absent
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

/// Where feature rows come from: a corpus run through preprocessing and a
/// provider, or a JSONL file of `{id, x, y}` rows.
#[derive(Debug, Clone, Args, Serialize)]
pub struct FeatureArgs {
    #[serde(rename = "in")]
    #[arg(long = "in", value_name = "PATH", conflicts_with = "features", required_unless_present = "features")]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = InputFormat::Auto)]
    pub input_format: InputFormat,
    #[arg(long, value_name = "PATH")]
    pub features: Option<PathBuf>,
    #[command(flatten)]
    pub prep: PrepArgs,
    #[command(flatten)]
    pub provider: ProviderArgs,
    #[command(flatten)]
    pub labels: LabelArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub features: FeatureArgs,
    #[arg(long, default_value = "svm")]
    pub model: String,
    /// Hyperparameter override `name=value`, repeatable
    #[arg(long = "param", value_name = "NAME=VALUE")]
    #[serde(rename = "param")]
    pub params: Vec<String>,
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvalOpts {
    /// Model kinds, comma separated, or `all`
    #[arg(long, value_delimiter = ',', default_value = "svm,logreg,mlp,rforest,gbt")]
    pub model: Vec<String>,
    /// Hyperparameter override `name=value` or `kind.name=value`, repeatable
    #[arg(long = "param", value_name = "NAME=VALUE")]
    #[serde(rename = "param")]
    pub params: Vec<String>,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    /// `none`, `default` or a grid file of `name = v1, v2` lines
    /// [default: none for evaluate, default for pipeline]
    #[arg(long)]
    pub grid: Option<String>,
    /// Positives for the random-baseline comparison
    #[arg(long)]
    pub baseline_positives: Option<u64>,
    #[arg(long)]
    pub baseline_total: Option<u64>,
    /// Also write the report here
    #[arg(long, value_name = "PATH")]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub features: FeatureArgs,
    #[command(flatten)]
    pub eval: EvalOpts,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BaselineArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub positives: u64,
    #[arg(long)]
    pub total: u64,
    /// `p=..,r=..,f1=..`
    #[arg(long, value_name = "LIST")]
    pub model_metrics: String,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PredictArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_name = "PATH")]
    pub model: PathBuf,
    #[command(flatten)]
    pub corpus: CorpusIn,
    #[command(flatten)]
    pub prep: PrepArgs,
    #[command(flatten)]
    pub provider: ProviderArgs,
    /// Predictions as JSONL; stdout when absent
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TaxonomyArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_name = "PATH")]
    pub labels: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ServeArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub addr: SocketAddr,
    /// Directory for round event logs
    #[arg(long, value_name = "DIR", default_value = "annotations")]
    pub data_dir: PathBuf,
    /// Corpus served at /reviews/{id} and checked on round creation
    #[arg(long = "corpus", value_name = "PATH")]
    pub corpus: Option<PathBuf>,
    /// Category definitions (JSONL) served at /taxonomy
    #[arg(long, value_name = "PATH")]
    pub definitions: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PipelineArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long = "in", value_name = "PATH")]
    #[serde(rename = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = InputFormat::Auto)]
    pub input_format: InputFormat,
    #[command(flatten)]
    pub dict: DictArgs,
    #[command(flatten)]
    pub prep: PrepArgs,
    #[command(flatten)]
    pub provider: ProviderArgs,
    #[command(flatten)]
    pub labels: LabelArgs,
    #[command(flatten)]
    pub eval: EvalOpts,
    /// Directory for the final models, one `<kind>.model.json` each
    #[arg(long, value_name = "DIR")]
    pub model_out: Option<PathBuf>,
}
