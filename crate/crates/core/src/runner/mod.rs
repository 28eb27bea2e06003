//! Experiment orchestration: k-shot translation, rule chains and the
//! transliteration bridge, plus result tables.

mod config;
mod persist;
mod table;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

pub use config::{ExperimentConfig, ExperimentId, Method};
pub use persist::{read_report, write_run, RunMetadata, StoredReport, RECORDS_FILE, REPORT_FILE, RUN_FILE};
pub use table::{emit_table, ResultTable, TableEntry, TableRow};

use crate::corpus::{CorpusError, Dataset, Direction, ParallelExample};
use crate::llm::{detect_degenerate, Client, CompletionResult, DegenerateFlag};
use crate::metrics::{evaluate_corpus_detailed, EvalOptions, MetricError, MetricReport};
use crate::par::{self, Parallelism};
use crate::prompts::{
    parse_rule_transcript, render_extraction, render_kshot, render_rule, render_simple, PromptError,
    PromptVariant, RenderedPrompt, RuleTranscript,
};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("invalid experiment config: {0}")]
    Config(String),
    #[error("shot pool has {available} examples, k = {k} needs more")]
    PoolTooSmall { k: usize, available: usize },
    #[error("test set is empty")]
    EmptyTestSet,
    #[error("all {0} sentences failed")]
    AllFailed(usize),
    #[error("no reports to tabulate")]
    EmptyTable,
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordStatus {
    Ok,
    /// The backend gave up, or an intermediate step was unusable.
    Failed,
    /// No final sentence could be recovered from a rule transcript.
    ParseFailed,
}

/// One test sentence pushed through a pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub example_id: String,
    pub input: String,
    pub reference: String,
    pub prompt_hashes: Vec<String>,
    pub raw_outputs: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<RuleTranscript>,
    /// The pre-cleaning text the final step produced.
    pub raw_final: String,
    pub cleaned_output: String,
    pub degenerate_flags: BTreeSet<DegenerateFlag>,
    pub status: RecordStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rouge_l_f1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meteor: Option<f64>,
}

impl GenerationRecord {
    fn new(example: &ParallelExample, direction: Direction) -> Self {
        let (input, reference) = match direction {
            Direction::En2Cm => (&example.english, &example.code_mixed),
            Direction::Cm2En => (&example.code_mixed, &example.english),
        };
        Self {
            example_id: example.id.clone(),
            input: input.clone(),
            reference: reference.clone(),
            prompt_hashes: Vec::new(),
            raw_outputs: Vec::new(),
            steps: None,
            raw_final: String::new(),
            cleaned_output: String::new(),
            degenerate_flags: BTreeSet::new(),
            status: RecordStatus::Ok,
            error: None,
            rouge_l_f1: None,
            meteor: None,
        }
    }

    fn call(&mut self, client: &Client, config: &ExperimentConfig, prompt: &RenderedPrompt) -> Option<CompletionResult> {
        self.prompt_hashes.push(prompt.hash());
        match client.complete(prompt, &config.params) {
            Ok(result) => {
                self.raw_outputs.push(result.text.clone());
                Some(result)
            }
            Err(e) => {
                self.raw_outputs.push(String::new());
                self.fail(RecordStatus::Failed, e.to_string());
                None
            }
        }
    }

    fn fail(&mut self, status: RecordStatus, message: impl Into<String>) {
        self.status = status;
        self.error = Some(message.into());
    }

    fn finish(&mut self, raw_final: &str, config: &ExperimentConfig) {
        self.raw_final = raw_final.to_string();
        self.cleaned_output = config.clean.clean(raw_final);
        self.degenerate_flags = detect_degenerate(raw_final);
    }

    /// Text handed to the metrics.
    pub fn hypothesis(&self, drop_degenerate: bool) -> &str {
        if self.status != RecordStatus::Ok || (drop_degenerate && !self.degenerate_flags.is_empty()) {
            ""
        } else {
            &self.cleaned_output
        }
    }
}

/// Records and scores for one experiment cell.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub config: ExperimentConfig,
    pub records: Vec<GenerationRecord>,
    pub report: MetricReport,
    pub failures: usize,
}

/// Dispatches on `config.method`. `pool` is only read by k-shot methods.
pub fn run(config: &ExperimentConfig, pool: &Dataset, test: &Dataset, client: &Client) -> Result<RunOutput, RunError> {
    match config.method {
        Method::KshotAlpha | Method::KshotBeta => run_kshot(config, pool, test, client),
        Method::Rule => run_rule_chain(config, test, client),
        Method::TranslitBridge => run_translit_bridge(config, test, client),
    }
}

pub fn run_kshot(config: &ExperimentConfig, pool: &Dataset, test: &Dataset, client: &Client) -> Result<RunOutput, RunError> {
    config.validate()?;
    let style = config
        .method
        .shot_style()
        .ok_or_else(|| RunError::Config(format!("{} is not a k-shot method", config.method)))?;
    if pool.len() < config.k {
        return Err(RunError::PoolTooSmall { k: config.k, available: pool.len() });
    }
    let shots = &pool.examples[..config.k];
    fan_out(config, test, |rec, _| {
        let prompt = match render_kshot(config.pair, config.direction, style, config.k, shots, &rec.input) {
            Ok(p) => p,
            Err(e) => return rec.fail(RecordStatus::Failed, e.to_string()),
        };
        if let Some(result) = rec.call(client, config, &prompt) {
            rec.finish(&result.text, config);
        }
    })
    .and_then(|records| score(config, records))
}

/// Rule prompt, then LLM extraction of the final sentence. The local
/// transcript parser stands in when extraction yields nothing usable, and
/// replaces the extraction call outright when the transcript itself is
/// degenerate.
pub fn run_rule_chain(config: &ExperimentConfig, test: &Dataset, client: &Client) -> Result<RunOutput, RunError> {
    config.validate()?;
    let rule_id = config
        .rule_id
        .ok_or_else(|| RunError::Config("method rule needs a rule id".into()))?;
    if config.method != Method::Rule {
        return Err(RunError::Config(format!("{} is not the rule method", config.method)));
    }
    fan_out(config, test, |rec, _| {
        let prompt = match render_rule(rule_id, config.pair, &rec.input) {
            Ok(p) => p,
            Err(e) => return rec.fail(RecordStatus::Failed, e.to_string()),
        };
        let Some(transcript) = rec.call(client, config, &prompt) else {
            return;
        };
        let parsed = parse_rule_transcript(&transcript.text, rule_id);
        rec.steps = parsed.as_ref().ok().cloned();

        if !transcript.is_degenerate() {
            if let Ok(ext_prompt) = render_extraction(&transcript.text) {
                rec.prompt_hashes.push(ext_prompt.hash());
                match client.complete(&ext_prompt, &config.params) {
                    Ok(ext) => {
                        rec.raw_outputs.push(ext.text.clone());
                        if !ext.is_degenerate() {
                            return rec.finish(&ext.text, config);
                        }
                    }
                    Err(e) => {
                        rec.raw_outputs.push(String::new());
                        log::warn!("{}: extraction failed, using local parser: {e}", rec.example_id);
                    }
                }
            }
        }
        match parsed {
            Ok(t) => rec.finish(&t.final_sentence, config),
            Err(e) => {
                rec.finish("", config);
                rec.fail(RecordStatus::ParseFailed, e.to_string());
            }
        }
    })
    .and_then(|records| score(config, records))
}

/// Transliterate the Roman code-mixed input into the matrix script, then
/// translate that to English zero-shot.
pub fn run_translit_bridge(config: &ExperimentConfig, test: &Dataset, client: &Client) -> Result<RunOutput, RunError> {
    config.validate()?;
    if config.method != Method::TranslitBridge {
        return Err(RunError::Config(format!("{} is not the bridge method", config.method)));
    }
    fan_out(config, test, |rec, _| {
        let step1 = match render_simple(PromptVariant::TranslitToMatrix, config.pair, &rec.input) {
            Ok(p) => p,
            Err(e) => return rec.fail(RecordStatus::Failed, e.to_string()),
        };
        let Some(translit) = rec.call(client, config, &step1) else {
            return;
        };
        if translit.is_degenerate() {
            let flags: Vec<_> = translit.degenerate_flags.iter().map(|f| format!("{f:?}")).collect();
            return rec.fail(RecordStatus::Failed, format!("transliteration flagged {}", flags.join(",")));
        }
        let native = config.clean.clean(&translit.text);
        let step2 = match render_simple(PromptVariant::TranslateCm2En, config.pair, &native) {
            Ok(p) => p,
            Err(e) => return rec.fail(RecordStatus::Failed, e.to_string()),
        };
        if let Some(result) = rec.call(client, config, &step2) {
            rec.finish(&result.text, config);
        }
    })
    .and_then(|records| score(config, records))
}

fn fan_out<F>(config: &ExperimentConfig, test: &Dataset, step: F) -> Result<Vec<GenerationRecord>, RunError>
where
    F: Fn(&mut GenerationRecord, &ParallelExample) + Sync + Send,
{
    if test.is_empty() {
        return Err(RunError::EmptyTestSet);
    }
    let records = par::map(&test.examples, Parallelism::workers(config.workers), |ex| {
        let mut rec = GenerationRecord::new(ex, config.direction);
        step(&mut rec, ex);
        rec
    });
    let failures = records.iter().filter(|r| r.status != RecordStatus::Ok).count();
    if failures == records.len() {
        return Err(RunError::AllFailed(failures));
    }
    Ok(records)
}

/// Scores records against their references and fills per-pair metrics.
pub fn score(config: &ExperimentConfig, mut records: Vec<GenerationRecord>) -> Result<RunOutput, RunError> {
    let pairs: Vec<(String, String)> = records
        .iter()
        .map(|r| (r.hypothesis(config.drop_degenerate).to_string(), r.reference.clone()))
        .collect();
    let options = EvalOptions {
        clean: config.clean.clone(),
        allow_empty_hypotheses: true,
        parallelism: Parallelism::workers(config.workers),
        ..EvalOptions::default()
    };
    let (report, per_pair) = evaluate_corpus_detailed(&pairs, config.direction, &options)?;
    for (rec, s) in records.iter_mut().zip(per_pair) {
        rec.rouge_l_f1 = Some(s.rouge_l_f1);
        rec.meteor = Some(s.meteor);
    }
    let failures = records.iter().filter(|r| r.status != RecordStatus::Ok).count();
    Ok(RunOutput { config: config.clone(), records, report, failures })
}
