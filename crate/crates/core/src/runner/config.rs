use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::RunError;
use crate::corpus::{CleanConfig, Direction, LanguagePair};
use crate::llm::CompletionParams;
use crate::prompts::{RuleId, ShotStyle, ALLOWED_K};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    KshotAlpha,
    KshotBeta,
    Rule,
    TranslitBridge,
}

impl Method {
    pub fn code(self) -> &'static str {
        match self {
            Method::KshotAlpha => "kshot-alpha",
            Method::KshotBeta => "kshot-beta",
            Method::Rule => "rule",
            Method::TranslitBridge => "translit-bridge",
        }
    }

    pub fn shot_style(self) -> Option<ShotStyle> {
        match self {
            Method::KshotAlpha => Some(ShotStyle::Alpha),
            Method::KshotBeta => Some(ShotStyle::Beta),
            _ => None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "kshot-alpha" | "alpha" => Ok(Method::KshotAlpha),
            "kshot-beta" | "beta" => Ok(Method::KshotBeta),
            "rule" | "rules" => Ok(Method::Rule),
            "translit-bridge" | "bridge" => Ok(Method::TranslitBridge),
            other => Err(format!(
                "unknown method `{other}` (expected kshot-alpha, kshot-beta, rule, translit-bridge)"
            )),
        }
    }
}

/// Identifies one row of a result table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ExperimentId {
    pub method: Method,
    pub k: usize,
    pub rule_id: Option<RuleId>,
}

impl ExperimentId {
    /// Sort key: k-shot rows by k then alpha before beta, then rules, then
    /// the bridge.
    pub fn sort_key(&self) -> (u8, usize, u8) {
        match self.method {
            Method::KshotAlpha => (0, self.k, 0),
            Method::KshotBeta => (0, self.k, if self.k == 0 { 0 } else { 1 }),
            Method::Rule => (1, self.rule_id.map_or(0, |r| r.number() as usize), 0),
            Method::TranslitBridge => (2, 0, 0),
        }
    }

    pub fn label(&self) -> String {
        match (self.method.shot_style(), self.method) {
            (Some(_), _) if self.k == 0 => "0-shot".to_string(),
            (Some(style), _) => format!("{}-shot {}", self.k, style.symbol()),
            (None, Method::Rule) => self.rule_id.map_or("Rule".into(), |r| r.to_string()),
            _ => "Translit bridge".to_string(),
        }
    }
}

/// Everything needed to reproduce one experiment cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub pair: LanguagePair,
    pub direction: Direction,
    pub method: Method,
    #[serde(default)]
    pub k: usize,
    #[serde(default)]
    pub rule_id: Option<RuleId>,
    pub backend_id: String,
    pub params: CompletionParams,
    pub seed: u64,
    pub n_pool: usize,
    pub n_test: usize,
    #[serde(default)]
    pub dataset_paths: Vec<PathBuf>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    pub workers: usize,
    /// Replace degenerate outputs with "" before scoring.
    #[serde(default)]
    pub drop_degenerate: bool,
    #[serde(default)]
    pub clean: CleanConfig,
    /// Pairs allowed to use the transliterate-then-translate method.
    pub bridge_pairs: Vec<LanguagePair>,
}

impl ExperimentConfig {
    pub fn new(pair: LanguagePair, direction: Direction, method: Method) -> Self {
        Self {
            pair,
            direction,
            method,
            k: 0,
            rule_id: None,
            backend_id: "mock".into(),
            params: CompletionParams::default(),
            seed: 0,
            n_pool: 20,
            n_test: 100,
            dataset_paths: Vec::new(),
            output_dir: None,
            workers: 4,
            drop_degenerate: false,
            clean: CleanConfig::default(),
            bridge_pairs: vec![LanguagePair::EnBn, LanguagePair::EnGu],
        }
    }

    pub fn kshot(pair: LanguagePair, direction: Direction, style: ShotStyle, k: usize) -> Self {
        let method = match style {
            ShotStyle::Alpha => Method::KshotAlpha,
            ShotStyle::Beta => Method::KshotBeta,
        };
        Self { k, ..Self::new(pair, direction, method) }
    }

    pub fn rule(pair: LanguagePair, rule_id: RuleId) -> Self {
        Self { rule_id: Some(rule_id), ..Self::new(pair, Direction::En2Cm, Method::Rule) }
    }

    pub fn bridge(pair: LanguagePair) -> Self {
        Self::new(pair, Direction::Cm2En, Method::TranslitBridge)
    }

    /// Table row for this config. 0-shot prompts have no shot style, so both
    /// k-shot methods map to one row at k = 0.
    pub fn experiment(&self) -> ExperimentId {
        let method = match self.method {
            Method::KshotBeta if self.k == 0 => Method::KshotAlpha,
            m => m,
        };
        ExperimentId {
            method,
            k: if self.method.shot_style().is_some() { self.k } else { 0 },
            rule_id: self.rule_id,
        }
    }

    pub fn validate(&self) -> Result<(), RunError> {
        let bad = |m: String| Err(RunError::Config(m));
        match self.method {
            Method::KshotAlpha | Method::KshotBeta => {
                if !ALLOWED_K.contains(&self.k) {
                    return bad(format!("k = {} is not one of 0, 1, 10, 20", self.k));
                }
                if self.rule_id.is_some() {
                    return bad("rule id given for a k-shot method".into());
                }
            }
            Method::Rule => {
                if self.rule_id.is_none() {
                    return bad("method rule needs a rule id".into());
                }
                if self.direction != Direction::En2Cm {
                    return bad("rule chains generate code-mixed text (direction en2cm)".into());
                }
            }
            Method::TranslitBridge => {
                if self.direction != Direction::Cm2En {
                    return bad("the transliteration bridge translates cm2en".into());
                }
                if !self.bridge_pairs.contains(&self.pair) {
                    return bad(format!(
                        "{} is not configured for the transliteration bridge",
                        self.pair
                    ));
                }
            }
        }
        if self.rule_id.is_some() && self.method != Method::Rule {
            return bad("rule id only applies to method rule".into());
        }
        self.params.validate().map_err(|e| RunError::Config(e.to_string()))
    }
}
