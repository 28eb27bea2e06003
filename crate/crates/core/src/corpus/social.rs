use std::sync::LazyLock;

use regex::Regex;

static URL: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"\s*(?:https?\S*|www\.\S+|t\.co/\S*)").expect("url regex")
});
static MENTION: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\s*@\w*").expect("mention regex"));

/// Social-media preprocessing: lowercase, drop URLs and @-mentions, drop the
/// `#` of hashtags, reduce any character repeated more than twice in a row
/// (whitespace included) to one occurrence, trim.
///
/// Removed URLs and mentions take their leading whitespace with them.
pub fn normalize_social(text: &str) -> String {
    let lower = text.to_lowercase();
    let no_urls = URL.replace_all(&lower, "");
    let no_mentions = MENTION.replace_all(&no_urls, "");
    let mut out = squeeze_runs(&no_mentions.replace('#', ""));
    // Dropping '#' can splice a new "http" together ("htt#p"); rerun until stable.
    while URL.is_match(&out) {
        out = squeeze_runs(&URL.replace_all(&out, ""));
    }
    out.trim().to_string()
}

fn squeeze_runs(text: &str) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len());
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let run = chars[i..].iter().take_while(|&&d| d == c).count();
        let keep = if run > 2 { 1 } else { run };
        out.extend(std::iter::repeat_n(c, keep));
        i += run;
    }
    out
}
