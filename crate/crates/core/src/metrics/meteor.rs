use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::TokenSeq;

/// Weight of recall over precision in the harmonic mean (9:1).
pub const ALPHA: f64 = 0.9;
pub const GAMMA: f64 = 0.5;
pub const BETA: f64 = 3.0;

/// Symmetric word-to-synonyms lookup for the third alignment stage.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SynonymTable {
    pub id: String,
    entries: HashMap<String, BTreeSet<String>>,
}

impl SynonymTable {
    pub fn new(id: impl Into<String>) -> Self {
        Self { id: id.into(), entries: HashMap::new() }
    }

    /// Declares every word in `group` a synonym of every other.
    pub fn add_group<I, S>(&mut self, group: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let words: Vec<String> = group.into_iter().map(|w| w.as_ref().to_lowercase()).collect();
        for w in &words {
            let set = self.entries.entry(w.clone()).or_default();
            set.extend(words.iter().filter(|o| *o != w).cloned());
        }
    }

    pub fn are_synonyms(&self, a: &str, b: &str) -> bool {
        self.entries.get(a).is_some_and(|s| s.contains(b))
    }
}

#[derive(Debug, Clone, Default)]
pub struct MeteorOptions {
    pub stemming: bool,
    pub synonyms: Option<Arc<SynonymTable>>,
}

pub fn stem(word: &str) -> String {
    porter_stemmer::stem(word)
}

/// Greedy one-to-one alignment, stage by stage. Within a stage the last
/// unmatched hypothesis word is paired with the last equal unmatched reference
/// word first, which mirrors the reference implementation's traversal.
/// Returns (hyp_index, ref_index) pairs.
pub fn align(hyp: &[String], reference: &[String], options: &MeteorOptions) -> Vec<(usize, usize)> {
    let mut hyp_left: Vec<usize> = (0..hyp.len()).collect();
    let mut ref_left: Vec<usize> = (0..reference.len()).collect();
    let mut matches = Vec::new();

    let mut stage = |eq: &dyn Fn(usize, usize) -> bool| {
        let mut hi = hyp_left.len();
        while hi > 0 {
            hi -= 1;
            let h = hyp_left[hi];
            if let Some(ri) = (0..ref_left.len()).rev().find(|&ri| eq(h, ref_left[ri])) {
                matches.push((h, ref_left[ri]));
                hyp_left.remove(hi);
                ref_left.remove(ri);
            }
        }
    };

    stage(&|h, r| hyp[h] == reference[r]);
    if options.stemming {
        let hyp_stems: Vec<String> = hyp.iter().map(|w| stem(w)).collect();
        let ref_stems: Vec<String> = reference.iter().map(|w| stem(w)).collect();
        stage(&|h, r| hyp_stems[h] == ref_stems[r]);
    }
    if let Some(table) = &options.synonyms {
        stage(&|h, r| table.are_synonyms(&hyp[h], &reference[r]));
    }
    matches.sort_unstable();
    matches
}

/// Number of maximal runs that are contiguous in both sequences. Expects
/// matches sorted by hypothesis index.
pub fn count_chunks(matches: &[(usize, usize)]) -> usize {
    if matches.is_empty() {
        return 0;
    }
    1 + matches
        .windows(2)
        .filter(|w| !(w[1].0 == w[0].0 + 1 && w[1].1 == w[0].1 + 1))
        .count()
}

/// Single-reference METEOR in [0, 1].
pub fn meteor(hyp: &TokenSeq, reference: &TokenSeq, options: &MeteorOptions) -> f64 {
    let matches = align(&hyp.tokens, &reference.tokens, options);
    let m = matches.len();
    if m == 0 {
        return 0.0;
    }
    let m_f = m as f64;
    let precision = m_f / hyp.len() as f64;
    let recall = m_f / reference.len() as f64;
    let f_mean = precision * recall / (ALPHA * precision + (1.0 - ALPHA) * recall);
    let fragmentation = count_chunks(&matches) as f64 / m_f;
    let penalty = GAMMA * fragmentation.powf(BETA);
    f_mean * (1.0 - penalty)
}
