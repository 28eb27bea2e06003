use std::collections::BTreeMap;

use super::PromptError;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Segment {
    Literal(String),
    Slot(String),
}

/// A plain-text template with `{slot}` markers. Slot names are lowercase
/// ASCII letters and underscores; any other brace is literal text. Leading
/// lines starting with `#` are a header and are not part of the body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    name: &'static str,
    segments: Vec<Segment>,
}

impl Template {
    pub fn parse(name: &'static str, source: &str) -> Self {
        let body: String = {
            let mut lines = source.split_inclusive('\n').peekable();
            while lines.next_if(|l| l.starts_with('#')).is_some() {}
            lines.collect()
        };
        let body = body.strip_suffix('\n').unwrap_or(&body);

        let mut segments = Vec::new();
        let mut literal = String::new();
        let mut rest = body;
        while let Some(open) = rest.find('{') {
            let after = &rest[open + 1..];
            let slot_len = after
                .find(|c: char| !(c.is_ascii_lowercase() || c == '_'))
                .unwrap_or(after.len());
            if slot_len > 0 && after[slot_len..].starts_with('}') {
                literal.push_str(&rest[..open]);
                if !literal.is_empty() {
                    segments.push(Segment::Literal(std::mem::take(&mut literal)));
                }
                segments.push(Segment::Slot(after[..slot_len].to_string()));
                rest = &after[slot_len + 1..];
            } else {
                literal.push_str(&rest[..=open]);
                rest = after;
            }
        }
        literal.push_str(rest);
        if !literal.is_empty() {
            segments.push(Segment::Literal(literal));
        }
        Self { name, segments }
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn slots(&self) -> impl Iterator<Item = &str> {
        self.segments.iter().filter_map(|s| match s {
            Segment::Slot(n) => Some(n.as_str()),
            Segment::Literal(_) => None,
        })
    }

    /// Substitutes in one pass, so values containing `{...}` are never
    /// re-expanded. Every slot must have a value.
    pub fn render(&self, values: &BTreeMap<String, String>) -> Result<String, PromptError> {
        let mut out = String::new();
        for seg in &self.segments {
            match seg {
                Segment::Literal(s) => out.push_str(s),
                Segment::Slot(name) => match values.get(name) {
                    Some(v) => out.push_str(v),
                    None => {
                        return Err(PromptError::MissingSlot {
                            template: self.name,
                            slot: name.clone(),
                        })
                    }
                },
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vals(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn header_and_slots() {
        let t = Template::parse("t", "# note\n# more\nHi {name}, {x} {Y} {}\n");
        assert_eq!(t.slots().collect::<Vec<_>>(), ["name", "x"]);
        let out = t.render(&vals(&[("name", "{x}"), ("x", "1")])).unwrap();
        assert_eq!(out, "Hi {x}, 1 {Y} {}");
    }

    #[test]
    fn missing_slot() {
        let t = Template::parse("t", "{a}{b}");
        assert!(matches!(
            t.render(&vals(&[("a", "")])),
            Err(PromptError::MissingSlot { slot, .. }) if slot == "b"
        ));
    }
}
