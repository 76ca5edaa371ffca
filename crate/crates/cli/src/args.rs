use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use revkit_core::revise::DEFAULT_INTENT_TEMPLATE;

#[derive(Parser, Debug)]
#[command(name = "revkit", version, about = "Iterative text revision toolkit", propagate_version = true)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug)]
pub struct GlobalOpts {
    /// Flat `key = value` file supplying defaults for any long option
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Upper bound on worker threads
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    /// Seed for every stochastic step
    #[arg(long, global = true, value_name = "N", default_value_t = 13)]
    pub seed: u64,
    /// Print errors on stderr as one JSON object
    #[arg(long, global = true)]
    pub json_errors: bool,
    /// Run manifest path; defaults to `<out>.manifest.json`
    #[arg(long, global = true, value_name = "FILE")]
    pub manifest: Option<PathBuf>,
    /// error, warn, info, debug or trace
    #[arg(long, global = true, value_name = "LEVEL", default_value = "warn")]
    pub log_level: String,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Fetch version histories and stage them as revision pairs
    Ingest(IngestArgs),
    /// Extract edit actions from revision pairs
    Extract(ExtractArgs),
    /// Label unlabeled edit actions with a trained intention model
    Classify(ClassifyArgs),
    /// Train the edit-intention classifier on human labels
    TrainIntent(TrainIntentArgs),
    /// Inter-annotator agreement (Fleiss' kappa) of raw labels
    Agreement(AgreementArgs),
    /// Score predictions against references
    Evaluate(EvaluateArgs),
    /// Run a reviser iteratively over documents
    Revise(ReviseArgs),
    /// Per-domain, per-depth and per-intention corpus counts
    Stats(StatsArgs),
    /// Train an n-gram language model for SLOR
    TrainLm(TrainLmArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Ingest(_) => "ingest",
            Command::Extract(_) => "extract",
            Command::Classify(_) => "classify",
            Command::TrainIntent(_) => "train-intent",
            Command::Agreement(_) => "agreement",
            Command::Evaluate(_) => "evaluate",
            Command::Revise(_) => "revise",
            Command::Stats(_) => "stats",
            Command::TrainLm(_) => "train-lm",
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum SourceArg {
    Wikipedia,
    Wikinews,
    Arxiv,
    Local,
}

#[derive(Args, Debug, Serialize)]
pub struct IngestArgs {
    #[arg(long, value_enum)]
    pub source: SourceArg,
    /// Page titles or ArXiv ids, one per line; for `local`, an optional filter
    #[arg(long, value_name = "FILE")]
    pub seed_list: Option<PathBuf>,
    /// Directory of `<doc_id>.v<N>.txt` files (local source)
    #[arg(long, value_name = "DIR")]
    pub input_dir: Option<PathBuf>,
    #[arg(long, value_name = "N", default_value_t = 5)]
    pub max_versions: usize,
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// Requests per second per endpoint
    #[arg(long, value_name = "R", default_value_t = 1.0)]
    pub rate_limit: f64,
    #[arg(long, value_name = "N", default_value_t = 4)]
    pub max_attempts: u32,
    /// API endpoint override
    #[arg(long, value_name = "URL")]
    pub endpoint: Option<String>,
    /// Response cache; falls back to REVKIT_CACHE_DIR
    #[arg(long, value_name = "DIR")]
    pub cache_dir: Option<PathBuf>,
    /// Request timeout in seconds
    #[arg(long, value_name = "SECS", default_value_t = 30)]
    pub timeout: u64,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum GranularityArg {
    /// Whole revision pairs with all actions
    Document,
    /// One record per changed paragraph
    Paragraph,
    /// One record per changed sentence
    Sentence,
    /// Paragraph records followed by sentence records
    Both,
}

#[derive(Args, Debug, Serialize)]
pub struct ExtractArgs {
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "document")]
    pub granularity: GranularityArg,
    /// Token-LCS ratio above which two sentences or paragraphs align
    #[arg(long, value_name = "X", default_value_t = revkit_core::diff::DEFAULT_ALIGN_THRESHOLD)]
    pub align_threshold: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct ClassifyArgs {
    #[arg(long, value_name = "FILE")]
    pub model: PathBuf,
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct TrainIntentArgs {
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    #[arg(long, value_name = "N", default_value_t = 200)]
    pub max_epochs: usize,
    #[arg(long, value_name = "X", default_value_t = 0.05)]
    pub learning_rate: f64,
    #[arg(long, value_name = "X", default_value_t = 1e-4)]
    pub l2: f64,
    /// Predictions below this confidence become `other`
    #[arg(long, value_name = "X", default_value_t = 0.2)]
    pub other_floor: f64,
    /// Write the test-split evaluation as JSON
    #[arg(long, value_name = "FILE")]
    pub report: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum ByArg {
    Domain,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum FormatArg {
    Table,
    Json,
    Tsv,
}

#[derive(Args, Debug, Serialize)]
pub struct AgreementArgs {
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    /// Add one column per domain
    #[arg(long, value_enum)]
    pub by: Option<ByArg>,
    /// table or json
    #[arg(long, value_enum, default_value = "table")]
    pub format: FormatArg,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum UnitArg {
    Char,
    Token,
}

#[derive(Args, Debug, Serialize)]
pub struct EvaluateArgs {
    /// Predictions: `{"id", "source", "prediction"}` lines or revision records
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    /// References: `{"id", "references": [..]}` lines or revision records
    #[arg(long = "ref", value_name = "FILE")]
    pub reference: Option<PathBuf>,
    /// Comma-separated: sari,bleu,rouge,fkgl,slor,eg,dist,cp
    #[arg(long, value_name = "LIST", default_value = "sari,bleu,rouge")]
    pub metrics: String,
    /// Language model for SLOR
    #[arg(long, value_name = "FILE")]
    pub lm: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "token")]
    pub distance_unit: UnitArg,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum RefreshArg {
    Once,
    Every,
}

#[derive(Args, Debug, Serialize)]
pub struct ReviseArgs {
    /// `rules` or `exec:COMMAND`
    #[arg(long, value_name = "KIND", default_value = "rules")]
    pub reviser: String,
    /// Documents: `{"id", "text", "intents"?}` lines or revision records
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    #[arg(long, value_name = "N", default_value_t = 10)]
    pub max_depth: u32,
    #[arg(long, value_name = "N", default_value_t = 0)]
    pub min_distance: usize,
    #[arg(long, value_enum, default_value = "char")]
    pub distance_unit: UnitArg,
    /// Prefix template for conditioning on intentions
    #[arg(long, value_name = "TEMPLATE", default_value = DEFAULT_INTENT_TEMPLATE)]
    pub intent_template: String,
    #[arg(long, value_enum, default_value = "every")]
    pub intent_refresh: RefreshArg,
    /// Comma-separated intentions given to every document without its own
    #[arg(long, value_name = "LIST")]
    pub intents: Option<String>,
    /// Reference-free metrics recorded at every depth (fkgl,slor,eg,cp)
    #[arg(long, value_name = "LIST")]
    pub metrics: Option<String>,
    #[arg(long, value_name = "FILE")]
    pub lm: Option<PathBuf>,
    /// One loop trace per line
    #[arg(long, value_name = "FILE")]
    pub trace_out: Option<PathBuf>,
    /// Final texts as `{"id", "text"}` lines
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Iterativeness bar chart
    #[arg(long, value_name = "FILE")]
    pub report_svg: Option<PathBuf>,
    /// Human revision chains to compare iteration counts with
    #[arg(long, value_name = "FILE")]
    pub human: Option<PathBuf>,
    /// Documents revised at once; defaults to the thread count
    #[arg(long, value_name = "N")]
    pub concurrency: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
pub struct StatsArgs {
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "table")]
    pub format: FormatArg,
}

#[derive(Args, Debug, Serialize)]
pub struct TrainLmArgs {
    /// Plain text, or a JSONL corpus whose version texts are used
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    #[arg(long, value_name = "N", default_value_t = 3)]
    pub order: usize,
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
}
