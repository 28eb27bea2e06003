use serde::{Deserialize, Serialize};

/// Leading tags models tend to echo back. Matched case-insensitively and
/// longest first.
pub const DEFAULT_LABELS: &[&str] = &[
    "Code-Mixed",
    "Code-Mixed Sentence",
    "Code-Mixed Translation",
    "Transliteration to Roman",
    "Transliteration into Roman",
    "Transliteration",
    "English",
    "English Translation",
    "Translation",
    "Output",
    "Final Sentence",
    "Answer",
];

const QUOTE_PAIRS: &[(char, char)] = &[
    ('"', '"'),
    ('\'', '\''),
    ('\u{201C}', '\u{201D}'),
    ('\u{2018}', '\u{2019}'),
    ('\u{00AB}', '\u{00BB}'),
    ('`', '`'),
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanConfig {
    pub labels: Vec<String>,
    /// Disables cleaning entirely; outputs are scored verbatim.
    pub strict: bool,
}

impl Default for CleanConfig {
    fn default() -> Self {
        Self {
            labels: DEFAULT_LABELS.iter().map(|s| s.to_string()).collect(),
            strict: false,
        }
    }
}

impl CleanConfig {
    pub fn strict() -> Self {
        Self { labels: Vec::new(), strict: true }
    }

    /// Strips leading labels and matched surrounding quotes, collapses
    /// whitespace, trims. Applied until a fixed point, so it is idempotent.
    pub fn clean(&self, raw: &str) -> String {
        if self.strict {
            return raw.to_string();
        }
        let mut labels: Vec<&str> = self.labels.iter().map(String::as_str).collect();
        labels.sort_by_key(|l| std::cmp::Reverse(l.len()));

        let mut current = collapse_whitespace(raw);
        loop {
            let mut next = strip_label(&current, &labels);
            next = strip_quotes(next);
            let next = collapse_whitespace(next);
            if next == current {
                return current;
            }
            current = next;
        }
    }
}

/// [`CleanConfig::clean`] with the default label list.
pub fn clean_output(raw: &str) -> String {
    CleanConfig::default().clean(raw)
}

fn collapse_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn strip_label<'a>(text: &'a str, labels: &[&str]) -> &'a str {
    for label in labels {
        let Some(head) = text.get(..label.len()) else { continue };
        if !head.eq_ignore_ascii_case(label) {
            continue;
        }
        let rest = text[label.len()..].trim_start();
        if let Some(after) = rest.strip_prefix(':') {
            return after.trim_start();
        }
    }
    text
}

fn strip_quotes(text: &str) -> &str {
    for &(open, close) in QUOTE_PAIRS {
        let Some(inner) = text.strip_prefix(open).and_then(|t| t.strip_suffix(close)) else {
            continue;
        };
        if !inner.contains(open) && !inner.contains(close) {
            return inner;
        }
    }
    text
}
