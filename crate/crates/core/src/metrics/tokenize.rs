use serde::{Deserialize, Serialize};

/// Identifier of the one tokenization policy this crate implements. Stored in
/// every report so scores from different policies are never mixed silently.
pub const TOKEN_POLICY: &str = "lower-punctsplit-ws/v1";

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TokenSeq {
    pub tokens: Vec<String>,
    pub policy_id: String,
}

impl TokenSeq {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn as_strs(&self) -> Vec<&str> {
        self.tokens.iter().map(String::as_str).collect()
    }
}

pub fn is_punctuation(c: char) -> bool {
    if c.is_ascii() {
        return c.is_ascii_punctuation();
    }
    matches!(
        c as u32,
        0x00A1 | 0x00A7 | 0x00AB | 0x00B6 | 0x00B7 | 0x00BB | 0x00BF
            | 0x037E | 0x0387
            | 0x055A..=0x055F
            | 0x0589 | 0x058A
            | 0x060C | 0x061B | 0x061F
            | 0x0964 | 0x0965 | 0x0970
            | 0x0AF0
            | 0x2010..=0x2027
            | 0x2030..=0x205E
            | 0x2E00..=0x2E4F
            | 0x3001..=0x3003
            | 0x3008..=0x3011
            | 0xFE50..=0xFE6B
            | 0xFF01..=0xFF0F
            | 0xFF1A..=0xFF20
    )
}

/// Lowercases, splits every punctuation character into its own token and
/// splits the rest on whitespace. Non-ASCII letters and combining marks are
/// kept inside words.
pub fn tokenize(text: &str) -> TokenSeq {
    let lower = text.to_lowercase();
    let mut tokens = Vec::new();
    let mut word = String::new();
    for c in lower.chars() {
        if c.is_whitespace() {
            if !word.is_empty() {
                tokens.push(std::mem::take(&mut word));
            }
        } else if is_punctuation(c) {
            if !word.is_empty() {
                tokens.push(std::mem::take(&mut word));
            }
            tokens.push(c.to_string());
        } else {
            word.push(c);
        }
    }
    if !word.is_empty() {
        tokens.push(word);
    }
    TokenSeq { tokens, policy_id: TOKEN_POLICY.to_string() }
}
