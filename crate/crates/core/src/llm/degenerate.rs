use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DegenerateFlag {
    Empty,
    Repetition,
}

/// Share of all tokens a single token must exceed to count as dominant.
pub const DOMINANCE_SHARE: f64 = 0.5;
/// Dominance is only judged on outputs at least this long.
pub const DOMINANCE_MIN_TOKENS: usize = 20;
/// A token repeated this many times in a row is always degenerate.
pub const MAX_CONSECUTIVE: usize = 10;

/// Flags empty outputs and runaway repetition. Tokens are whitespace-split.
pub fn detect_degenerate(text: &str) -> BTreeSet<DegenerateFlag> {
    let mut flags = BTreeSet::new();
    let tokens: Vec<&str> = text.split_whitespace().collect();
    if tokens.is_empty() {
        flags.insert(DegenerateFlag::Empty);
        return flags;
    }
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for t in &tokens {
        *counts.entry(t).or_default() += 1;
    }
    let top = counts.values().copied().max().unwrap_or(0);
    let dominant =
        tokens.len() >= DOMINANCE_MIN_TOKENS && top as f64 > DOMINANCE_SHARE * tokens.len() as f64;

    let mut longest_run = 1;
    let mut run = 1;
    for w in tokens.windows(2) {
        run = if w[0] == w[1] { run + 1 } else { 1 };
        longest_run = longest_run.max(run);
    }
    if dominant || longest_run >= MAX_CONSECUTIVE {
        flags.insert(DegenerateFlag::Repetition);
    }
    flags
}
