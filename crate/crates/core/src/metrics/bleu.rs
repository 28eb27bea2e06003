use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{MetricError, TokenSeq};

pub const MAX_ORDER: usize = 4;

/// Clipped matches over candidate n-grams for one order, summed over a corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct NgramPrecision {
    pub matched: u64,
    pub total: u64,
}

impl NgramPrecision {
    pub fn value(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.matched as f64 / self.total as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BleuBreakdown {
    pub precisions: [NgramPrecision; MAX_ORDER],
    pub hyp_length: u64,
    pub ref_length: u64,
    pub brevity_penalty: f64,
}

/// Sufficient statistics of one sentence pair. Summing these over pairs is
/// order independent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BleuStats {
    pub precisions: [NgramPrecision; MAX_ORDER],
    pub hyp_length: u64,
    pub ref_length: u64,
}

impl std::ops::AddAssign for BleuStats {
    fn add_assign(&mut self, rhs: Self) {
        for (a, b) in self.precisions.iter_mut().zip(rhs.precisions) {
            a.matched += b.matched;
            a.total += b.total;
        }
        self.hyp_length += rhs.hyp_length;
        self.ref_length += rhs.ref_length;
    }
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], u64> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for gram in tokens.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

pub fn sentence_stats(hyp: &TokenSeq, reference: &TokenSeq) -> BleuStats {
    let mut stats = BleuStats {
        hyp_length: hyp.len() as u64,
        ref_length: reference.len() as u64,
        ..Default::default()
    };
    for n in 1..=MAX_ORDER {
        let hyp_counts = ngram_counts(&hyp.tokens, n);
        let ref_counts = ngram_counts(&reference.tokens, n);
        let matched = hyp_counts
            .iter()
            .map(|(gram, &c)| c.min(ref_counts.get(gram).copied().unwrap_or(0)))
            .sum();
        stats.precisions[n - 1] = NgramPrecision {
            matched,
            total: hyp.len().saturating_sub(n - 1) as u64,
        };
    }
    stats
}

/// Unsmoothed BLEU from aggregated statistics. Any zero precision yields 0.
pub fn bleu_from_stats(stats: &BleuStats) -> Result<(f64, BleuBreakdown), MetricError> {
    if stats.hyp_length == 0 {
        return Err(MetricError::EmptyCorpus);
    }
    let (c, r) = (stats.hyp_length, stats.ref_length);
    let brevity_penalty = if c > r { 1.0 } else { (1.0 - r as f64 / c as f64).exp() };
    let breakdown = BleuBreakdown {
        precisions: stats.precisions,
        hyp_length: c,
        ref_length: r,
        brevity_penalty,
    };
    if stats.precisions.iter().any(|p| p.matched == 0) {
        return Ok((0.0, breakdown));
    }
    let log_mean = stats
        .precisions
        .iter()
        .map(|p| (p.matched as f64 / p.total as f64).ln())
        .sum::<f64>()
        / MAX_ORDER as f64;
    Ok((brevity_penalty * log_mean.exp(), breakdown))
}

/// Corpus BLEU in [0, 1] with uniform weights over 1..4-grams and a single
/// reference per hypothesis. Every hypothesis must be non-empty.
pub fn corpus_bleu(hyps: &[TokenSeq], refs: &[TokenSeq]) -> Result<(f64, BleuBreakdown), MetricError> {
    corpus_bleu_with(hyps, refs, false)
}

/// Like [`corpus_bleu`], but `allow_empty` lets individual hypotheses be empty
/// (they add reference length only). The corpus as a whole still needs c > 0.
pub fn corpus_bleu_with(
    hyps: &[TokenSeq],
    refs: &[TokenSeq],
    allow_empty: bool,
) -> Result<(f64, BleuBreakdown), MetricError> {
    check_lengths(hyps.len(), refs.len())?;
    let mut total = BleuStats::default();
    for (index, (h, r)) in hyps.iter().zip(refs).enumerate() {
        if h.is_empty() && !allow_empty {
            return Err(MetricError::EmptyHypothesis { index });
        }
        total += sentence_stats(h, r);
    }
    bleu_from_stats(&total)
}

pub(crate) fn check_lengths(hyps: usize, refs: usize) -> Result<(), MetricError> {
    if hyps != refs {
        return Err(MetricError::LengthMismatch { hyps, refs });
    }
    if hyps == 0 {
        return Err(MetricError::NoPairs);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::tokenize;

    fn toks(s: &str) -> TokenSeq {
        tokenize(s)
    }

    #[test]
    fn identity_is_one() {
        let h = vec![toks("the cat sat on the mat")];
        let (score, bd) = corpus_bleu(&h, &h).unwrap();
        assert_eq!(score, 1.0);
        assert_eq!(bd.brevity_penalty, 1.0);
    }

    #[test]
    fn cat_mat_breakdown() {
        let (score, bd) =
            corpus_bleu(&[toks("the cat sat on the mat")], &[toks("the cat sat on a mat")]).unwrap();
        let got: Vec<(u64, u64)> = bd.precisions.iter().map(|p| (p.matched, p.total)).collect();
        assert_eq!(got, [(5, 6), (3, 5), (2, 4), (1, 3)]);
        assert!((score - (1.0f64 / 12.0).powf(0.25)).abs() < 1e-12);
        assert_eq!(format!("{:.2}", score * 100.0), "53.73");
    }

    #[test]
    fn disjoint_is_zero() {
        let (score, _) = corpus_bleu(&[toks("aaa bbb")], &[toks("ccc ddd")]).unwrap();
        assert_eq!(score, 0.0);
    }

    #[test]
    fn brevity_penalty_short_hypothesis() {
        let (score, bd) = corpus_bleu(
            &[toks("a b c d e")],
            &[toks("a b c d e f g h i j")],
        )
        .unwrap();
        assert!((bd.brevity_penalty - (1.0f64 - 2.0).exp()).abs() < 1e-15);
        assert!((score - bd.brevity_penalty).abs() < 1e-15);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            corpus_bleu(&[toks("a")], &[]),
            Err(MetricError::LengthMismatch { hyps: 1, refs: 0 })
        ));
        assert!(matches!(corpus_bleu(&[], &[]), Err(MetricError::NoPairs)));
        assert!(matches!(
            corpus_bleu(&[toks("a b c d"), toks("")], &[toks("a b c d"), toks("x")]),
            Err(MetricError::EmptyHypothesis { index: 1 })
        ));
        let (s, _) =
            corpus_bleu_with(&[toks("a b c d"), toks("")], &[toks("a b c d"), toks("x")], true).unwrap();
        assert!(s > 0.0 && s < 1.0);
        assert!(matches!(
            corpus_bleu_with(&[toks("")], &[toks("x")], true),
            Err(MetricError::EmptyCorpus)
        ));
    }
}
