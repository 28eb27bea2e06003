//! Corpus BLEU (unsmoothed), ROUGE-L F1 and METEOR over a shared tokenizer.

mod bleu;
mod meteor;
mod rouge;
mod tokenize;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::corpus::{CleanConfig, Direction};
use crate::par::{self, Parallelism};

pub use bleu::{
    bleu_from_stats, corpus_bleu, corpus_bleu_with, sentence_stats, BleuBreakdown, BleuStats,
    NgramPrecision, MAX_ORDER,
};
pub use meteor::{align, count_chunks, meteor, stem, MeteorOptions, SynonymTable};
pub use rouge::{lcs_length, rouge_l, RougeScore};
pub use tokenize::{is_punctuation, tokenize, TokenSeq, TOKEN_POLICY};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricError {
    #[error("hypothesis/reference count mismatch: {hyps} vs {refs}")]
    LengthMismatch { hyps: usize, refs: usize },
    #[error("no sentence pairs to score")]
    NoPairs,
    #[error("empty hypothesis at pair index {index}")]
    EmptyHypothesis { index: usize },
    #[error("total hypothesis length is zero")]
    EmptyCorpus,
}

/// Options recorded alongside each report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportOptions {
    pub stemming: bool,
    pub synonym_table: Option<String>,
    pub token_policy: String,
    pub cleaning: bool,
}

/// Scores for one experiment cell, in percent at full precision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub bleu: f64,
    pub rouge_l_f1: f64,
    pub meteor: f64,
    pub n_pairs: usize,
    pub options: ReportOptions,
    pub bleu_breakdown: BleuBreakdown,
}

impl MetricReport {
    pub fn cells(&self) -> [String; 3] {
        [self.bleu, self.rouge_l_f1, self.meteor].map(|v| format!("{v:.2}"))
    }

    pub fn to_tsv(&self) -> String {
        let [b, r, m] = self.cells();
        format!("BLEU\tROUGE-L\tMETEOR\tn\n{b}\t{r}\t{m}\t{}\n", self.n_pairs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairScore {
    pub rouge_l_f1: f64,
    pub meteor: f64,
}

#[derive(Debug, Clone, Default)]
pub struct EvalOptions {
    /// `None` turns stemming on for CM2EN only.
    pub stemming: Option<bool>,
    pub synonyms: Option<Arc<SynonymTable>>,
    pub clean: CleanConfig,
    /// Score empty hypotheses as zero-length output instead of failing.
    pub allow_empty_hypotheses: bool,
    pub parallelism: Parallelism,
}

impl EvalOptions {
    pub fn stemming_for(&self, direction: Direction) -> bool {
        self.stemming.unwrap_or(direction == Direction::Cm2En)
    }
}

struct PairEval {
    stats: BleuStats,
    score: PairScore,
    empty: bool,
}

/// Cleans hypotheses, tokenizes both sides and computes the three metrics.
/// Returns the report plus per-pair ROUGE-L/METEOR in [0, 1].
pub fn evaluate_corpus_detailed(
    pairs: &[(String, String)],
    direction: Direction,
    options: &EvalOptions,
) -> Result<(MetricReport, Vec<PairScore>), MetricError> {
    if pairs.is_empty() {
        return Err(MetricError::NoPairs);
    }
    let meteor_opts = MeteorOptions {
        stemming: options.stemming_for(direction),
        synonyms: options.synonyms.clone(),
    };
    let evals = par::map(pairs, options.parallelism, |(hyp, reference)| {
        let h = tokenize(&options.clean.clean(hyp));
        let r = tokenize(reference);
        PairEval {
            stats: sentence_stats(&h, &r),
            score: PairScore {
                rouge_l_f1: rouge_l(&h, &r).f1,
                meteor: meteor(&h, &r, &meteor_opts),
            },
            empty: h.is_empty(),
        }
    });
    if !options.allow_empty_hypotheses {
        if let Some(index) = evals.iter().position(|e| e.empty) {
            return Err(MetricError::EmptyHypothesis { index });
        }
    }
    let mut total = BleuStats::default();
    for e in &evals {
        total += e.stats;
    }
    let (bleu, bleu_breakdown) = bleu_from_stats(&total)?;
    let n = evals.len() as f64;
    let per_pair: Vec<PairScore> = evals.iter().map(|e| e.score).collect();
    let rouge = per_pair.iter().map(|s| s.rouge_l_f1).sum::<f64>() / n;
    let met = per_pair.iter().map(|s| s.meteor).sum::<f64>() / n;
    let report = MetricReport {
        bleu: bleu * 100.0,
        rouge_l_f1: rouge * 100.0,
        meteor: met * 100.0,
        n_pairs: pairs.len(),
        options: ReportOptions {
            stemming: meteor_opts.stemming,
            synonym_table: options.synonyms.as_ref().map(|t| t.id.clone()),
            token_policy: TOKEN_POLICY.to_string(),
            cleaning: !options.clean.strict,
        },
        bleu_breakdown,
    };
    Ok((report, per_pair))
}

pub fn evaluate_corpus(
    pairs: &[(String, String)],
    direction: Direction,
    options: &EvalOptions,
) -> Result<MetricReport, MetricError> {
    evaluate_corpus_detailed(pairs, direction, options).map(|(r, _)| r)
}
