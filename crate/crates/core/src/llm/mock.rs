use std::collections::HashMap;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Backend, BackendError, CallRecord, CompletionParams};
use crate::prompts::{prompt_hash, RenderedPrompt};

/// One line of a fixture file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fixture {
    pub prompt_hash: String,
    pub response: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MockMode {
    /// A prompt without a fixture is an error.
    #[default]
    Strict,
    /// A prompt without a fixture echoes the prompt's last non-empty line.
    Lenient,
}

/// Deterministic offline backend keyed by prompt hash.
#[derive(Debug, Clone, Default)]
pub struct MockBackend {
    id: String,
    fixtures: HashMap<String, String>,
    mode: MockMode,
}

impl MockBackend {
    pub fn new(id: impl Into<String>, mode: MockMode) -> Self {
        Self { id: id.into(), fixtures: HashMap::new(), mode }
    }

    pub fn with_fixtures(mut self, fixtures: impl IntoIterator<Item = Fixture>) -> Self {
        for f in fixtures {
            self.fixtures.insert(f.prompt_hash, f.response);
        }
        self
    }

    /// Adds a response for prompt text (hashed on insert).
    pub fn insert(&mut self, prompt_text: &str, response: impl Into<String>) {
        self.fixtures.insert(prompt_hash(prompt_text), response.into());
    }

    /// Rebuilds a backend from a recorded ledger so a run can be replayed.
    pub fn from_records(id: impl Into<String>, records: &[CallRecord]) -> Self {
        let fixtures = records.iter().filter_map(|r| {
            r.result.as_ref().map(|res| Fixture {
                prompt_hash: r.prompt_hash.clone(),
                response: res.text.clone(),
            })
        });
        Self::new(id, MockMode::Strict).with_fixtures(fixtures)
    }

    pub fn load(id: impl Into<String>, path: impl AsRef<Path>, mode: MockMode) -> io::Result<Self> {
        let text = fs::read_to_string(path)?;
        let mut fixtures = Vec::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            fixtures.push(serde_json::from_str::<Fixture>(line).map_err(io::Error::other)?);
        }
        Ok(Self::new(id, mode).with_fixtures(fixtures))
    }

    pub fn fixtures(&self) -> Vec<Fixture> {
        let mut v: Vec<Fixture> = self
            .fixtures
            .iter()
            .map(|(h, r)| Fixture { prompt_hash: h.clone(), response: r.clone() })
            .collect();
        v.sort_by(|a, b| a.prompt_hash.cmp(&b.prompt_hash));
        v
    }

    pub fn save(&self, path: impl AsRef<Path>) -> io::Result<()> {
        let mut out = io::BufWriter::new(fs::File::create(path)?);
        for f in self.fixtures() {
            serde_json::to_writer(&mut out, &f)?;
            out.write_all(b"\n")?;
        }
        out.flush()
    }

    pub fn len(&self) -> usize {
        self.fixtures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fixtures.is_empty()
    }
}

impl Backend for MockBackend {
    fn id(&self) -> &str {
        &self.id
    }

    fn send(&self, prompt: &RenderedPrompt, _params: &CompletionParams) -> Result<String, BackendError> {
        let hash = prompt.hash();
        if let Some(r) = self.fixtures.get(&hash) {
            return Ok(r.clone());
        }
        match self.mode {
            MockMode::Strict => Err(BackendError::FixtureMiss { hash }),
            MockMode::Lenient => Ok(prompt
                .text
                .lines()
                .rev()
                .find(|l| !l.trim().is_empty())
                .unwrap_or("")
                .trim()
                .to_string()),
        }
    }
}

/// Backend driven by a closure, for scripted pipelines.
pub struct FnBackend<F> {
    id: String,
    f: F,
}

impl<F> FnBackend<F>
where
    F: Fn(&RenderedPrompt) -> Result<String, BackendError> + Send + Sync,
{
    pub fn new(id: impl Into<String>, f: F) -> Self {
        Self { id: id.into(), f }
    }
}

impl<F> Backend for FnBackend<F>
where
    F: Fn(&RenderedPrompt) -> Result<String, BackendError> + Send + Sync,
{
    fn id(&self) -> &str {
        &self.id
    }

    fn send(&self, prompt: &RenderedPrompt, _params: &CompletionParams) -> Result<String, BackendError> {
        (self.f)(prompt)
    }
}
