use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use codemix_core::corpus::{Direction, LanguagePair};
use codemix_core::prompts::RuleId;
use codemix_core::runner::Method;

#[derive(Debug, Parser)]
#[command(name = "codemix", version, about = "Code-mixed machine translation experiments and chatbot")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one k-shot or bridge experiment over a dataset.
    Run(RunArgs),
    /// Run a rule-based chain (EN to code-mixed).
    Rules(RulesArgs),
    /// Score a hypothesis file against a reference file.
    Score(ScoreArgs),
    /// Merge run directories into one result table.
    Table(TableArgs),
    /// Build or serve the retrieval chatbot.
    #[command(subcommand)]
    Chatbot(ChatbotCommand),
}

#[derive(Debug, Clone, Args)]
pub struct BackendArgs {
    /// `mock` for the offline fixture backend, anything else for a remote
    /// chat-completions endpoint keyed by `CODEMIX_API_KEY_<ID>`.
    #[arg(long, default_value = "mock")]
    pub backend: String,
    /// JSON-lines fixture file for the mock backend.
    #[arg(long)]
    pub fixtures: Option<PathBuf>,
    /// Echo the prompt's last line when a fixture is missing.
    #[arg(long)]
    pub lenient: bool,
    #[arg(long)]
    pub endpoint: Option<String>,
    /// Model name sent to the backend; defaults to the backend id.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long, default_value_t = 0.0)]
    pub temperature: f64,
    #[arg(long, default_value_t = 1024)]
    pub max_tokens: u32,
    #[arg(long, default_value_t = 3)]
    pub max_retries: u32,
    #[arg(long, default_value_t = 60.0)]
    pub timeout_secs: f64,
    /// Requests allowed per rate window.
    #[arg(long)]
    pub rate_limit: Option<usize>,
    #[arg(long, default_value_t = 60.0)]
    pub rate_window_secs: f64,
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    #[arg(long, value_parser = parse_pair)]
    pub pair: LanguagePair,
    /// TSV (english, code-mixed) or JSON-lines dataset.
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Examples reserved for k-shot demonstrations.
    #[arg(long, default_value_t = 20)]
    pub pool: usize,
    /// Test sentences drawn after the pool.
    #[arg(long, default_value_t = 100)]
    pub test: usize,
    #[arg(long, default_value_t = 4)]
    pub workers: usize,
    /// Score degenerate outputs as empty.
    #[arg(long)]
    pub drop_degenerate: bool,
    /// Score raw outputs without label or quote stripping.
    #[arg(long)]
    pub strict_clean: bool,
    /// Also write every backend call to calls.jsonl.
    #[arg(long)]
    pub record_calls: bool,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_parser = parse_direction, default_value = "en2cm")]
    pub direction: Direction,
    #[arg(long, default_value = "kshot-beta")]
    pub method: Method,
    #[arg(long, default_value_t = 0)]
    pub k: usize,
    /// Pairs allowed to use the transliteration bridge.
    #[arg(long, value_parser = parse_pair, value_delimiter = ',', default_value = "en-bn,en-gu")]
    pub bridge_pairs: Vec<LanguagePair>,
    #[command(flatten)]
    pub backend: BackendArgs,
}

#[derive(Debug, Clone, Args)]
pub struct RulesArgs {
    #[arg(long, value_parser = parse_rule)]
    pub rule: RuleId,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub backend: BackendArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ScoreArgs {
    /// One hypothesis per line.
    #[arg(long)]
    pub hyp: PathBuf,
    /// One reference per line.
    #[arg(long = "ref")]
    pub reference: PathBuf,
    #[arg(long, value_parser = parse_direction, default_value = "en2cm")]
    pub direction: Direction,
    /// Force METEOR stemming on or off (default: on for cm2en only).
    #[arg(long)]
    pub stemming: Option<bool>,
    #[arg(long)]
    pub strict_clean: bool,
    /// Treat empty hypotheses as zero-length output instead of an error.
    #[arg(long)]
    pub allow_empty: bool,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args)]
pub struct TableArgs {
    #[arg(required = true)]
    pub runs: Vec<PathBuf>,
    /// Directory for table.tsv and table.md; prints TSV when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum ChatbotCommand {
    /// Chunk a document into a persisted parent/leaf index.
    Index(IndexArgs),
    /// Serve /chat, /pairs and /health.
    Serve(Box<ServeArgs>),
}

#[derive(Debug, Clone, Args)]
pub struct IndexArgs {
    #[arg(long)]
    pub doc: PathBuf,
    #[arg(long, default_value = "index")]
    pub out: PathBuf,
    #[arg(long, default_value_t = codemix_core::chatbot::DEFAULT_LEAF_SIZE)]
    pub leaf_size: usize,
    #[arg(long, default_value_t = codemix_core::chatbot::DEFAULT_PARENT_SIZE)]
    pub parent_size: usize,
}

#[derive(Debug, Clone, Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    /// Persisted index directory.
    #[arg(long, default_value = "index")]
    pub index: PathBuf,
    /// Build the index from this document instead of loading one.
    #[arg(long)]
    pub doc: Option<PathBuf>,
    /// Allowed CORS origin; any origin when absent.
    #[arg(long)]
    pub cors_origin: Option<String>,
    /// Require `Authorization: Bearer <token>` on /chat.
    #[arg(long)]
    pub token: Option<String>,
    #[arg(long, default_value_t = 6)]
    pub history: usize,
    /// Pairs whose queries are transliterated before translation.
    #[arg(long, value_parser = parse_pair, value_delimiter = ',', default_value = "en-bn")]
    pub bridge_pairs: Vec<LanguagePair>,
    /// `/embeddings` endpoint for leaf scoring instead of BM25.
    #[arg(long)]
    pub embedding_endpoint: Option<String>,
    #[arg(long, default_value = "text-embedding-3-small")]
    pub embedding_model: String,
    /// `/rerank` endpoint instead of term-overlap reranking.
    #[arg(long)]
    pub rerank_endpoint: Option<String>,
    #[arg(long, default_value = "rerank")]
    pub rerank_model: String,
    #[command(flatten)]
    pub backend: BackendArgs,
}

fn parse_pair(s: &str) -> Result<LanguagePair, String> {
    s.parse().map_err(|e: codemix_core::corpus::UnknownPair| e.to_string())
}

fn parse_direction(s: &str) -> Result<Direction, String> {
    s.parse()
}

fn parse_rule(s: &str) -> Result<RuleId, String> {
    s.parse().map_err(|e: codemix_core::prompts::PromptError| e.to_string())
}
