use serde::{Deserialize, Serialize};

use super::TokenSeq;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RougeScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Length of the longest common subsequence, two-row DP.
pub fn lcs_length<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { cur[j].max(prev[j + 1]) };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// ROUGE-L precision/recall/F1 in [0, 1]. Empty input on either side gives zeros.
pub fn rouge_l(hyp: &TokenSeq, reference: &TokenSeq) -> RougeScore {
    if hyp.is_empty() || reference.is_empty() {
        return RougeScore::default();
    }
    let lcs = lcs_length(&hyp.tokens, &reference.tokens) as f64;
    let precision = lcs / hyp.len() as f64;
    let recall = lcs / reference.len() as f64;
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    RougeScore { precision, recall, f1 }
}
