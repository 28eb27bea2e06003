use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use super::{PromptError, RuleId};

static STEP_START: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^\s*(\d+)\.\s*(.*)$").expect("step regex"));

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptStep {
    pub number: u32,
    pub label: String,
    pub body: String,
}

/// A numbered rule-chain transcript and the sentence its last step produced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleTranscript {
    pub rule_id: RuleId,
    pub steps: Vec<TranscriptStep>,
    pub final_sentence: String,
}

/// Splits a transcript on line-initial `N.` markers (1, 2, 3, ... in order;
/// out-of-sequence numbers are treated as continuation text). Each step's
/// label ends at its first colon. The final sentence is the first non-empty
/// line after the last step's colon.
pub fn parse_rule_transcript(text: &str, rule_id: RuleId) -> Result<RuleTranscript, PromptError> {
    let text: String = text.nfc().collect();
    let mut raw_steps: Vec<(u32, String)> = Vec::new();
    for line in text.lines() {
        let expected = raw_steps.len() as u32 + 1;
        if let Some(caps) = STEP_START.captures(line) {
            if caps[1].parse::<u32>().ok() == Some(expected) {
                raw_steps.push((expected, caps[2].to_string()));
                continue;
            }
        }
        if let Some((_, body)) = raw_steps.last_mut() {
            body.push('\n');
            body.push_str(line);
        }
    }
    if raw_steps.is_empty() {
        return Err(PromptError::NoSteps);
    }

    let steps: Vec<TranscriptStep> = raw_steps
        .into_iter()
        .map(|(number, content)| match content.split_once(':') {
            Some((label, body)) => TranscriptStep {
                number,
                label: label.trim().to_string(),
                body: body.trim().to_string(),
            },
            None => TranscriptStep { number, label: content.trim().to_string(), body: String::new() },
        })
        .collect();

    let last = steps.last().expect("non-empty");
    let final_sentence = last
        .body
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty())
        .map(str::to_string)
        .ok_or(PromptError::MissingFinalSentence { step: last.number })?;
    Ok(RuleTranscript { rule_id, steps, final_sentence })
}
