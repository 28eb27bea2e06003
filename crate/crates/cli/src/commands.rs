use std::fs;
use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, Context};
use codemix_core::chatbot::{build_index, Index};
use codemix_core::corpus::{load_parallel, split_examples, CleanConfig};
use codemix_core::llm::Client;
use codemix_core::metrics::{evaluate_corpus, EvalOptions, MetricReport};
use codemix_core::par::Parallelism;
use codemix_core::runner::{self, emit_table, read_report, write_run, ExperimentConfig, Method, ResultTable, RunOutput, TableEntry};

use crate::args::{BackendArgs, DataArgs, IndexArgs, RulesArgs, RunArgs, ScoreArgs, TableArgs};
use crate::backend;

pub const TABLE_TSV: &str = "table.tsv";
pub const TABLE_MD: &str = "table.md";
pub const CALLS_FILE: &str = "calls.jsonl";

fn base_config(config: &mut ExperimentConfig, data: &DataArgs, backend_args: &BackendArgs) {
    config.backend_id = backend_args.backend.clone();
    config.params = backend::params(backend_args);
    config.seed = data.seed;
    config.n_pool = data.pool;
    config.n_test = data.test;
    config.dataset_paths = vec![data.dataset.clone()];
    config.output_dir = Some(data.out.clone());
    config.workers = data.workers;
    config.drop_degenerate = data.drop_degenerate;
    if data.strict_clean {
        config.clean = CleanConfig::strict();
    }
}

pub fn run_config(args: &RunArgs) -> ExperimentConfig {
    let mut config = ExperimentConfig::new(args.data.pair, args.direction, args.method);
    config.k = args.k;
    config.bridge_pairs = args.bridge_pairs.clone();
    base_config(&mut config, &args.data, &args.backend);
    config
}

pub fn rules_config(args: &RulesArgs) -> ExperimentConfig {
    let mut config = ExperimentConfig::rule(args.data.pair, args.rule);
    base_config(&mut config, &args.data, &args.backend);
    config
}

/// Loads, splits, runs and persists one experiment.
pub fn execute(config: &ExperimentConfig, client: &Client, out: &Path) -> anyhow::Result<RunOutput> {
    config.validate()?;
    let path = config.dataset_paths.first().context("no dataset given")?;
    let dataset = load_parallel(path, config.pair).with_context(|| format!("loading {}", path.display()))?;
    // The pool is drawn for every method so all cells share one test set.
    let (pool, test) = split_examples(&dataset, config.n_pool, config.n_test, config.seed)?;
    let output = runner::run(config, &pool, &test, client)?;
    let stored = write_run(out, &output)?;
    write_table(out, &emit_table(&[TableEntry::from(&stored)])?)?;
    if let Some(rec) = client.recorder() {
        rec.write_jsonl(out.join(CALLS_FILE))?;
    }
    if output.failures > 0 {
        log::warn!("{} of {} sentences failed", output.failures, output.records.len());
    }
    Ok(output)
}

pub fn write_table(dir: &Path, table: &ResultTable) -> anyhow::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(TABLE_TSV), table.to_tsv())?;
    fs::write(dir.join(TABLE_MD), table.to_markdown())?;
    Ok(())
}

fn summary(output: &RunOutput) -> String {
    let [b, r, m] = output.report.cells();
    format!(
        "{} {} {}: BLEU {b} ROUGE-L {r} METEOR {m} ({} sentences, {} failed)",
        output.config.pair,
        output.config.direction,
        output.config.experiment().label(),
        output.records.len(),
        output.failures
    )
}

pub fn run(args: &RunArgs) -> anyhow::Result<()> {
    if args.method == Method::Rule {
        bail!("use `codemix rules --rule N` for rule chains");
    }
    let config = run_config(args);
    let client = backend::client(&args.backend, args.data.record_calls)?;
    println!("{}", summary(&execute(&config, &client, &args.data.out)?));
    Ok(())
}

pub fn rules(args: &RulesArgs) -> anyhow::Result<()> {
    let config = rules_config(args);
    let client = backend::client(&args.backend, args.data.record_calls)?;
    println!("{}", summary(&execute(&config, &client, &args.data.out)?));
    Ok(())
}

fn read_lines(path: &Path) -> anyhow::Result<Vec<String>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(text.lines().map(str::to_string).collect())
}

pub fn score_files(args: &ScoreArgs) -> anyhow::Result<MetricReport> {
    let hyps = read_lines(&args.hyp)?;
    let refs = read_lines(&args.reference)?;
    if hyps.len() != refs.len() {
        bail!("{} hypotheses but {} references", hyps.len(), refs.len());
    }
    let pairs: Vec<(String, String)> = hyps.into_iter().zip(refs).collect();
    let options = EvalOptions {
        stemming: args.stemming,
        clean: if args.strict_clean { CleanConfig::strict() } else { CleanConfig::default() },
        allow_empty_hypotheses: args.allow_empty,
        parallelism: Parallelism::Auto,
        ..EvalOptions::default()
    };
    Ok(evaluate_corpus(&pairs, args.direction, &options)?)
}

pub fn score(args: &ScoreArgs) -> anyhow::Result<()> {
    let report = score_files(args)?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        print!("{}", report.to_tsv());
    }
    Ok(())
}

pub fn table(args: &TableArgs) -> anyhow::Result<ResultTable> {
    let entries = args
        .runs
        .iter()
        .map(|dir| read_report(dir).map(|s| TableEntry::from(&s)).with_context(|| format!("reading {}", dir.display())))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let table = emit_table(&entries)?;
    match &args.out {
        Some(dir) => write_table(dir, &table)?,
        None => print!("{}", table.to_tsv()),
    }
    Ok(table)
}

pub fn index(args: &IndexArgs) -> anyhow::Result<Arc<Index>> {
    let doc = fs::read_to_string(&args.doc).with_context(|| format!("reading {}", args.doc.display()))?;
    let index = build_index(&doc, args.leaf_size, args.parent_size)?;
    index.save(&args.out)?;
    println!(
        "indexed {} parents, {} leaves into {}",
        index.parents.len(),
        index.leaves.len(),
        args.out.display()
    );
    Ok(Arc::new(index))
}
