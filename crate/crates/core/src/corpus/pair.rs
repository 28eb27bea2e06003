use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Writing system of a matrix language.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Script {
    Latin,
    Devanagari,
    Bengali,
    Gujarati,
    Other,
}

impl Script {
    pub fn name(self) -> &'static str {
        match self {
            Script::Latin => "Latin",
            Script::Devanagari => "Devanagari",
            Script::Bengali => "Bengali",
            Script::Gujarati => "Gujarati",
            Script::Other => "Other",
        }
    }
}

/// One of the five English-X pairs. English is always the embedded language.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LanguagePair {
    #[serde(rename = "en-hi")]
    EnHi,
    #[serde(rename = "en-bn")]
    EnBn,
    #[serde(rename = "en-gu")]
    EnGu,
    #[serde(rename = "en-fr")]
    EnFr,
    #[serde(rename = "en-es")]
    EnEs,
}

impl LanguagePair {
    /// Table column order: HI, BN, GU, FR, ES.
    pub const ALL: [LanguagePair; 5] = [
        LanguagePair::EnHi,
        LanguagePair::EnBn,
        LanguagePair::EnGu,
        LanguagePair::EnFr,
        LanguagePair::EnEs,
    ];

    pub fn code(self) -> &'static str {
        match self {
            LanguagePair::EnHi => "en-hi",
            LanguagePair::EnBn => "en-bn",
            LanguagePair::EnGu => "en-gu",
            LanguagePair::EnFr => "en-fr",
            LanguagePair::EnEs => "en-es",
        }
    }

    pub fn matrix_language(self) -> &'static str {
        match self {
            LanguagePair::EnHi => "Hindi",
            LanguagePair::EnBn => "Bengali",
            LanguagePair::EnGu => "Gujarati",
            LanguagePair::EnFr => "French",
            LanguagePair::EnEs => "Spanish",
        }
    }

    /// Name used inside "code-mixed X-English" phrases. Only Bengali differs
    /// from the plain language name ("Bangla").
    pub fn prompt_alias(self) -> &'static str {
        match self {
            LanguagePair::EnBn => "Bangla",
            other => other.matrix_language(),
        }
    }

    /// Human-facing label, e.g. "English-Hindi".
    pub fn display_name(self) -> String {
        format!("English-{}", self.matrix_language())
    }

    pub fn matrix_script(self) -> Script {
        match self {
            LanguagePair::EnHi => Script::Devanagari,
            LanguagePair::EnBn => Script::Bengali,
            LanguagePair::EnGu => Script::Gujarati,
            LanguagePair::EnFr | LanguagePair::EnEs => Script::Latin,
        }
    }

    pub fn is_latin(self) -> bool {
        self.matrix_script() == Script::Latin
    }

    /// Default for the chatbot flow: only Bengali queries go through the
    /// native-script bridge. Callers may override per pair.
    pub fn requires_translit_bridge(self) -> bool {
        self == LanguagePair::EnBn
    }
}

impl fmt::Display for LanguagePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// Translation direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "en2cm")]
    En2Cm,
    #[serde(rename = "cm2en")]
    Cm2En,
}

impl Direction {
    pub fn code(self) -> &'static str {
        match self {
            Direction::En2Cm => "en2cm",
            Direction::Cm2En => "cm2en",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "en2cm" => Ok(Direction::En2Cm),
            "cm2en" => Ok(Direction::Cm2En),
            other => Err(format!("unknown direction `{other}` (expected en2cm or cm2en)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown language pair `{0}` (expected one of en-hi, en-bn, en-gu, en-fr, en-es)")]
pub struct UnknownPair(pub String);

impl FromStr for LanguagePair {
    type Err = UnknownPair;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        LanguagePair::ALL
            .into_iter()
            .find(|p| p.code() == norm)
            .ok_or_else(|| UnknownPair(s.to_string()))
    }
}
