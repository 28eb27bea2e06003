use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::Script;

/// Per-script letter counts for one string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptProfile {
    pub counts: BTreeMap<Script, usize>,
    /// Latin letters over all letters; 0 when there are no letters.
    pub latin_ratio: f64,
}

impl ScriptProfile {
    pub fn letters(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn count(&self, script: Script) -> usize {
        self.counts.get(&script).copied().unwrap_or(0)
    }
}

fn classify(c: char) -> Script {
    match c as u32 {
        0x0041..=0x024F | 0x1E00..=0x1EFF | 0x2C60..=0x2C7F | 0xA720..=0xA7FF
        | 0xAB30..=0xAB6F | 0xFF21..=0xFF3A | 0xFF41..=0xFF5A => Script::Latin,
        0x0900..=0x097F | 0xA8E0..=0xA8FF => Script::Devanagari,
        0x0980..=0x09FF => Script::Bengali,
        0x0A80..=0x0AFF => Script::Gujarati,
        _ => Script::Other,
    }
}

/// Counts alphabetic codepoints by Unicode block.
pub fn script_profile(text: &str) -> ScriptProfile {
    let mut counts: BTreeMap<Script, usize> = [
        Script::Latin,
        Script::Devanagari,
        Script::Bengali,
        Script::Gujarati,
        Script::Other,
    ]
    .into_iter()
    .map(|s| (s, 0))
    .collect();
    for c in text.chars().filter(|c| c.is_alphabetic()) {
        *counts.entry(classify(c)).or_default() += 1;
    }
    let total: usize = counts.values().sum();
    let latin_ratio = if total == 0 {
        0.0
    } else {
        counts[&Script::Latin] as f64 / total as f64
    };
    ScriptProfile { counts, latin_ratio }
}
