//! Prompt families and rule-chain transcript parsing.
//!
//! Templates live in `templates/` as plain text with `{slot}` markers and are
//! compiled into the binary. Rendering is deterministic: identical inputs
//! give byte-identical prompts.

mod template;
mod transcript;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use unicode_normalization::UnicodeNormalization;

use crate::corpus::{Direction, LanguagePair, ParallelExample};

pub use template::Template;
pub use transcript::{parse_rule_transcript, RuleTranscript, TranscriptStep};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PromptError {
    #[error("expected {expected} shots, got {got}")]
    ShotCount { expected: usize, got: usize },
    #[error("k = {0} is not one of 0, 1, 10, 20")]
    UnsupportedK(usize),
    #[error("input sentence is empty")]
    EmptySentence,
    #[error("transcript to extract from is empty")]
    EmptyTranscript,
    #[error("unknown rule id `{0}` (expected 1-4)")]
    UnknownRule(String),
    #[error("template `{template}` has no value for slot `{slot}`")]
    MissingSlot { template: &'static str, slot: String },
    #[error("transcript has no numbered steps")]
    NoSteps,
    #[error("step {step} has no sentence after its label")]
    MissingFinalSentence { step: u32 },
}

pub const ALLOWED_K: [usize; 4] = [0, 1, 10, 20];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PromptVariant {
    KshotAlpha,
    KshotBeta,
    Rule,
    Extraction,
    TranslateCm2En,
    TranslitToMatrix,
    TranslateEn2Cm0Shot,
    ChatAnswer,
    ChatToCm,
}

/// k-shot example style: alpha shows only code-mixed sentences, beta shows
/// English/code-mixed pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShotStyle {
    Alpha,
    Beta,
}

impl ShotStyle {
    pub fn symbol(self) -> &'static str {
        match self {
            ShotStyle::Alpha => "α",
            ShotStyle::Beta => "β",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RuleId {
    R1,
    R2,
    R3,
    R4,
}

impl RuleId {
    pub const ALL: [RuleId; 4] = [RuleId::R1, RuleId::R2, RuleId::R3, RuleId::R4];

    pub fn number(self) -> u8 {
        match self {
            RuleId::R1 => 1,
            RuleId::R2 => 2,
            RuleId::R3 => 3,
            RuleId::R4 => 4,
        }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Rule {}", self.number())
    }
}

impl FromStr for RuleId {
    type Err = PromptError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().trim_start_matches(['r', 'R']);
        match t {
            "1" => Ok(RuleId::R1),
            "2" => Ok(RuleId::R2),
            "3" => Ok(RuleId::R3),
            "4" => Ok(RuleId::R4),
            _ => Err(PromptError::UnknownRule(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PromptKind {
    pub variant: PromptVariant,
    pub k: usize,
    pub rule_id: Option<RuleId>,
    pub direction: Direction,
}

impl PromptKind {
    pub fn kshot(style: ShotStyle, k: usize, direction: Direction) -> Result<Self, PromptError> {
        if !ALLOWED_K.contains(&k) {
            return Err(PromptError::UnsupportedK(k));
        }
        let variant = match style {
            ShotStyle::Alpha => PromptVariant::KshotAlpha,
            ShotStyle::Beta => PromptVariant::KshotBeta,
        };
        Ok(Self { variant, k, rule_id: None, direction })
    }

    pub fn rule(rule_id: RuleId) -> Self {
        Self {
            variant: PromptVariant::Rule,
            k: 0,
            rule_id: Some(rule_id),
            direction: Direction::En2Cm,
        }
    }

    pub fn simple(variant: PromptVariant, direction: Direction) -> Self {
        debug_assert!(!matches!(
            variant,
            PromptVariant::KshotAlpha | PromptVariant::KshotBeta | PromptVariant::Rule
        ));
        Self { variant, k: 0, rule_id: None, direction }
    }

    /// Short stable label, e.g. `kshot-beta-10`, `rule-2`, `chat-answer`.
    pub fn label(&self) -> String {
        match self.variant {
            PromptVariant::KshotAlpha => format!("kshot-alpha-{}", self.k),
            PromptVariant::KshotBeta => format!("kshot-beta-{}", self.k),
            PromptVariant::Rule => format!("rule-{}", self.rule_id.map_or(0, RuleId::number)),
            PromptVariant::Extraction => "extraction".into(),
            PromptVariant::TranslateCm2En => "translate-cm2en".into(),
            PromptVariant::TranslitToMatrix => "transliterate".into(),
            PromptVariant::TranslateEn2Cm0Shot => "translate-en2cm".into(),
            PromptVariant::ChatAnswer => "chat-answer".into(),
            PromptVariant::ChatToCm => "chat-to-cm".into(),
        }
    }
}

/// A fully instantiated prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderedPrompt {
    pub kind: PromptKind,
    pub pair: Option<LanguagePair>,
    pub text: String,
    pub placeholders_filled: BTreeMap<String, String>,
}

impl RenderedPrompt {
    /// Wraps ad-hoc text (tests, replay) as a prompt of the given kind.
    pub fn raw(kind: PromptKind, pair: Option<LanguagePair>, text: impl Into<String>) -> Self {
        Self { kind, pair, text: text.into(), placeholders_filled: BTreeMap::new() }
    }

    pub fn hash(&self) -> String {
        prompt_hash(&self.text)
    }
}

/// Normalizes prompt text for hashing: NFC, CRLF to LF, trailing whitespace
/// on each line and at the ends removed.
pub fn normalize_prompt(text: &str) -> String {
    let nfc: String = text.nfc().collect();
    nfc.replace("\r\n", "\n")
        .lines()
        .map(str::trim_end)
        .collect::<Vec<_>>()
        .join("\n")
        .trim()
        .to_string()
}

/// Stable hex SHA-256 of the normalized prompt text.
pub fn prompt_hash(text: &str) -> String {
    hex::encode(Sha256::digest(normalize_prompt(text).as_bytes()))
}

macro_rules! template {
    ($name:literal) => {
        LazyLock::new(|| Template::parse($name, include_str!(concat!("../../templates/", $name, ".txt"))))
    };
}

static EN2CM_0SHOT: LazyLock<Template> = template!("en2cm_0shot");
static EN2CM_ALPHA_1: LazyLock<Template> = template!("en2cm_alpha_1shot");
static EN2CM_ALPHA_K: LazyLock<Template> = template!("en2cm_alpha_kshot");
static EN2CM_BETA_1: LazyLock<Template> = template!("en2cm_beta_1shot");
static EN2CM_BETA_K: LazyLock<Template> = template!("en2cm_beta_kshot");
static CM2EN_0SHOT: LazyLock<Template> = template!("cm2en_0shot");
static CM2EN_ALPHA: LazyLock<Template> = template!("cm2en_alpha");
static CM2EN_BETA: LazyLock<Template> = template!("cm2en_beta");
static TRANSLIT: LazyLock<Template> = template!("translit_to_matrix");
static CHAT_ANSWER: LazyLock<Template> = template!("chat_answer");
static CHAT_TO_CM: LazyLock<Template> = template!("chat_to_cm");
static EXTRACTION: LazyLock<Template> = template!("extraction");

const RULE_SOURCES: [(&str, &str); 4] = [
    ("rule_1", include_str!("../../templates/rule_1.txt")),
    ("rule_2", include_str!("../../templates/rule_2.txt")),
    ("rule_3", include_str!("../../templates/rule_3.txt")),
    ("rule_4", include_str!("../../templates/rule_4.txt")),
];

fn pair_slots(pair: LanguagePair) -> BTreeMap<String, String> {
    BTreeMap::from([
        ("matrix_language".to_string(), pair.matrix_language().to_string()),
        ("matrix_alias".to_string(), pair.prompt_alias().to_string()),
    ])
}

fn render(
    template: &Template,
    kind: PromptKind,
    pair: Option<LanguagePair>,
    mut slots: BTreeMap<String, String>,
) -> Result<RenderedPrompt, PromptError> {
    let text = template.render(&slots)?;
    let used: Vec<String> = template.slots().map(str::to_string).collect();
    slots.retain(|k, _| used.contains(k));
    Ok(RenderedPrompt { kind, pair, text, placeholders_filled: slots })
}

fn require_sentence(sentence: &str) -> Result<&str, PromptError> {
    let s = sentence.trim();
    if s.is_empty() {
        Err(PromptError::EmptySentence)
    } else {
        Ok(s)
    }
}

fn format_shots(shots: &[ParallelExample], style: ShotStyle, direction: Direction) -> String {
    match style {
        ShotStyle::Alpha => shots
            .iter()
            .map(|s| format!("\"{}\"", s.code_mixed))
            .collect::<Vec<_>>()
            .join("\n"),
        ShotStyle::Beta => shots
            .iter()
            .map(|s| match direction {
                Direction::En2Cm => {
                    format!("English: \"{}\"\n\nCode-Mixed: \"{}\"", s.english, s.code_mixed)
                }
                Direction::Cm2En => {
                    format!("Code-Mixed: \"{}\"\n\nEnglish: \"{}\"", s.code_mixed, s.english)
                }
            })
            .collect::<Vec<_>>()
            .join("\n\n"),
    }
}

/// Renders a k-shot prompt. `sentence` is English for EN2CM and code-mixed
/// for CM2EN; shots appear in the order given.
pub fn render_kshot(
    pair: LanguagePair,
    direction: Direction,
    style: ShotStyle,
    k: usize,
    shots: &[ParallelExample],
    sentence: &str,
) -> Result<RenderedPrompt, PromptError> {
    let kind = PromptKind::kshot(style, k, direction)?;
    if shots.len() != k {
        return Err(PromptError::ShotCount { expected: k, got: shots.len() });
    }
    let sentence = require_sentence(sentence)?;
    let template: &Template = match (direction, k, style) {
        (Direction::En2Cm, 0, _) => &EN2CM_0SHOT,
        (Direction::En2Cm, 1, ShotStyle::Alpha) => &EN2CM_ALPHA_1,
        (Direction::En2Cm, 1, ShotStyle::Beta) => &EN2CM_BETA_1,
        (Direction::En2Cm, _, ShotStyle::Alpha) => &EN2CM_ALPHA_K,
        (Direction::En2Cm, _, ShotStyle::Beta) => &EN2CM_BETA_K,
        (Direction::Cm2En, 0, _) => &CM2EN_0SHOT,
        (Direction::Cm2En, _, ShotStyle::Alpha) => &CM2EN_ALPHA,
        (Direction::Cm2En, _, ShotStyle::Beta) => &CM2EN_BETA,
    };
    let mut slots = pair_slots(pair);
    slots.insert("sentence".into(), sentence.to_string());
    slots.insert("examples".into(), format_shots(shots, style, direction));
    render(template, kind, Some(pair), slots)
}

/// Expands `@step`/`@translit` lines into a numbered list. Transliteration
/// steps are dropped for Latin-script pairs.
fn expand_rule_steps(source: &str, latin: bool) -> String {
    let mut n = 0;
    let mut out = String::with_capacity(source.len());
    for line in source.split_inclusive('\n') {
        let (step, keep) = if let Some(rest) = line.strip_prefix("@step ") {
            (Some(rest), true)
        } else if let Some(rest) = line.strip_prefix("@translit ") {
            (Some(rest), !latin)
        } else {
            (None, true)
        };
        match step {
            Some(rest) if keep => {
                n += 1;
                out.push_str(&format!("{n}. {rest}"));
            }
            Some(_) => {}
            None => out.push_str(line),
        }
    }
    out
}

pub fn render_rule(rule_id: RuleId, pair: LanguagePair, sentence: &str) -> Result<RenderedPrompt, PromptError> {
    let sentence = require_sentence(sentence)?;
    let (name, source) = RULE_SOURCES[(rule_id.number() - 1) as usize];
    let template = Template::parse(name, &expand_rule_steps(source, pair.is_latin()));
    let mut slots = pair_slots(pair);
    slots.insert("sentence".into(), sentence.to_string());
    render(&template, PromptKind::rule(rule_id), Some(pair), slots)
}

/// Longest run of consecutive backticks in `text`.
fn longest_backtick_run(text: &str) -> usize {
    text.split(|c| c != '`').map(str::len).max().unwrap_or(0)
}

/// Wraps a rule-chain transcript in the extraction prompt. The fence grows
/// past any backtick run inside the transcript.
pub fn render_extraction(llm_output: &str) -> Result<RenderedPrompt, PromptError> {
    if llm_output.trim().is_empty() {
        return Err(PromptError::EmptyTranscript);
    }
    let fence = "`".repeat(longest_backtick_run(llm_output).max(2) + 1);
    let slots = BTreeMap::from([
        ("fence".to_string(), fence),
        ("llm_output".to_string(), llm_output.to_string()),
    ]);
    render(
        &EXTRACTION,
        PromptKind::simple(PromptVariant::Extraction, Direction::En2Cm),
        None,
        slots,
    )
}

/// Single-sentence prompts: transliteration into the matrix script, zero-shot
/// CM2EN translation, zero-shot EN2CM translation.
pub fn render_simple(
    variant: PromptVariant,
    pair: LanguagePair,
    sentence: &str,
) -> Result<RenderedPrompt, PromptError> {
    let sentence = require_sentence(sentence)?;
    let (template, direction): (&Template, Direction) = match variant {
        PromptVariant::TranslitToMatrix => (&TRANSLIT, Direction::Cm2En),
        PromptVariant::TranslateCm2En => (&CM2EN_0SHOT, Direction::Cm2En),
        PromptVariant::TranslateEn2Cm0Shot => (&EN2CM_0SHOT, Direction::En2Cm),
        PromptVariant::ChatToCm => (&CHAT_TO_CM, Direction::En2Cm),
        other => panic!("render_simple does not handle {other:?}"),
    };
    let mut slots = pair_slots(pair);
    slots.insert("sentence".into(), sentence.to_string());
    render(template, PromptKind::simple(variant, direction), Some(pair), slots)
}

/// One earlier exchange shown to the answer prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub question_en: String,
    pub answer_en: String,
}

/// Answer prompt for the chatbot: retrieved context, recent history, and the
/// English question.
pub fn render_chat_answer(
    pair: LanguagePair,
    context: &[&str],
    history: &[HistoryEntry],
    question_en: &str,
) -> Result<RenderedPrompt, PromptError> {
    let question = require_sentence(question_en)?;
    let context = context
        .iter()
        .enumerate()
        .map(|(i, c)| format!("[{}] {}", i + 1, c.trim()))
        .collect::<Vec<_>>()
        .join("\n\n");
    let history = if history.is_empty() {
        String::new()
    } else {
        let mut h = String::from("Conversation so far:\n");
        for e in history {
            h.push_str(&format!("Q: {}\nA: {}\n", e.question_en, e.answer_en));
        }
        h.push('\n');
        h
    };
    let slots = BTreeMap::from([
        ("context".to_string(), context),
        ("history".to_string(), history),
        ("question".to_string(), question.to_string()),
    ]);
    render(
        &CHAT_ANSWER,
        PromptKind::simple(PromptVariant::ChatAnswer, Direction::En2Cm),
        Some(pair),
        slots,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shot(en: &str, cm: &str) -> ParallelExample {
        ParallelExample {
            id: "s".into(),
            pair: LanguagePair::EnBn,
            english: en.into(),
            code_mixed: cm.into(),
        }
    }

    fn shots(n: usize) -> Vec<ParallelExample> {
        (0..n).map(|i| shot(&format!("english number {i} here"), &format!("mixed bakya {i} ekhane"))).collect()
    }

    #[test]
    fn kshot_errors() {
        let s = shots(1);
        assert_eq!(
            render_kshot(LanguagePair::EnHi, Direction::En2Cm, ShotStyle::Beta, 10, &s, "x"),
            Err(PromptError::ShotCount { expected: 10, got: 1 })
        );
        assert_eq!(
            render_kshot(LanguagePair::EnHi, Direction::En2Cm, ShotStyle::Beta, 1, &s, "  "),
            Err(PromptError::EmptySentence)
        );
        assert_eq!(
            render_kshot(LanguagePair::EnHi, Direction::En2Cm, ShotStyle::Beta, 3, &shots(3), "x"),
            Err(PromptError::UnsupportedK(3))
        );
    }

    #[test]
    fn kshot_counts_and_single_input() {
        for dir in [Direction::En2Cm, Direction::Cm2En] {
            for k in ALLOWED_K {
                let s = shots(k);
                let input = "The quick input sentence";
                let beta = render_kshot(LanguagePair::EnHi, dir, ShotStyle::Beta, k, &s, input).unwrap();
                let alpha = render_kshot(LanguagePair::EnHi, dir, ShotStyle::Alpha, k, &s, input).unwrap();
                for ex in &s {
                    assert_eq!(beta.text.matches(&ex.english).count(), 1);
                    assert_eq!(beta.text.matches(&ex.code_mixed).count(), 1);
                    assert_eq!(alpha.text.matches(&ex.english).count(), 0);
                    assert_eq!(alpha.text.matches(&ex.code_mixed).count(), 1);
                }
                assert_eq!(beta.text.matches(input).count(), 1);
                assert_eq!(alpha.text.matches(input).count(), 1);
                assert!(!beta.text.contains("{"), "{}", beta.text);
            }
        }
    }

    #[test]
    fn rules_mention_required_steps() {
        let r1 = render_rule(RuleId::R1, LanguagePair::EnHi, "Is it such a curious question?").unwrap();
        let first = r1.text.lines().find(|l| l.starts_with("1. ")).unwrap();
        assert!(first.contains("translated to the matrix language, which is PoS tagged"));
        assert!(first.starts_with("1. Hindi Translation:"));

        let r2 = render_rule(RuleId::R2, LanguagePair::EnBn, "x y").unwrap();
        assert!(r2.text.contains("Noun (NN), Adjective (JJ), Adverb (RB), CC, or Interjection (UH)"));
        let r4 = render_rule(RuleId::R4, LanguagePair::EnHi, "x y").unwrap();
        assert!(r4.text.contains("the phrase with the second-largest length"));
        let r3 = render_rule(RuleId::R3, LanguagePair::EnGu, "x y").unwrap();
        assert!(r3.text.contains("5. Transliteration into Roman:"));
    }

    #[test]
    fn latin_pairs_skip_transliteration() {
        for rule in RuleId::ALL {
            let fr = render_rule(rule, LanguagePair::EnFr, "It will be fine").unwrap();
            assert!(!fr.text.contains("Roman script"), "{}", fr.text);
            let hi = render_rule(rule, LanguagePair::EnHi, "It will be fine").unwrap();
            let steps = |t: &str| t.lines().filter(|l| l.chars().next().is_some_and(|c| c.is_ascii_digit())).count();
            assert_eq!(steps(&hi.text), steps(&fr.text) + 1);
            assert_eq!(hi.kind.rule_id, Some(rule));
        }
        assert!("5".parse::<RuleId>().is_err());
        assert_eq!("r2".parse::<RuleId>().unwrap(), RuleId::R2);
    }

    #[test]
    fn extraction_fences() {
        let p = render_extraction("1. A: x\n2. B: y").unwrap();
        assert!(p.text.ends_with("LLM Output : ```\n1. A: x\n2. B: y\n```"));
        let p = render_extraction("1. A: ```code```\n2. B: y").unwrap();
        assert!(p.text.contains("LLM Output : ````\n"));
        assert!(p.text.ends_with("\n````"));
        assert_eq!(render_extraction(""), Err(PromptError::EmptyTranscript));
    }

    #[test]
    fn hash_ignores_line_endings_and_trailing_space() {
        assert_eq!(prompt_hash("a \r\nb\n"), prompt_hash("a\nb"));
        assert_ne!(prompt_hash("a\nb"), prompt_hash("a b"));
        assert_eq!(prompt_hash("x").len(), 64);
    }

    #[test]
    fn chat_prompts() {
        let p = render_chat_answer(
            LanguagePair::EnHi,
            &["ctx one", "ctx two"],
            &[HistoryEntry { question_en: "q0".into(), answer_en: "a0".into() }],
            "What is BLEU?",
        )
        .unwrap();
        assert!(p.text.contains("[1] ctx one\n\n[2] ctx two"));
        assert!(p.text.contains("Q: q0\nA: a0"));
        assert!(p.text.contains("Question: What is BLEU?"));
        let t = render_simple(PromptVariant::TranslitToMatrix, LanguagePair::EnBn, "finetuning er somporke bolo").unwrap();
        assert!(t.text.contains("into Bengali script: finetuning er somporke bolo"));
    }
}
