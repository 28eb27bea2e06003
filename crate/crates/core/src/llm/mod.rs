//! Chat-completion backends behind one contract: a prompt goes in, text
//! comes out. The [`Client`] adds retries with exponential backoff, a shared
//! rate limiter, degenerate-output flags and an optional call ledger.

mod degenerate;
mod limiter;
mod mock;
mod record;
mod remote;

use std::collections::BTreeSet;
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::prompts::RenderedPrompt;

pub use degenerate::{detect_degenerate, DegenerateFlag, DOMINANCE_MIN_TOKENS, DOMINANCE_SHARE, MAX_CONSECUTIVE};
pub use limiter::RateLimiter;
pub use mock::{Fixture, FnBackend, MockBackend, MockMode};
pub use record::{read_records, write_records, CallRecord, Recorder};
pub use remote::{api_key_var, RemoteBackend, DEFAULT_ENDPOINT};

mod duration_ms {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_millis() as u64)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        Ok(Duration::from_millis(u64::deserialize(d)?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionParams {
    pub model_name: String,
    pub temperature: f64,
    pub max_output_tokens: u32,
    #[serde(rename = "timeout_ms", with = "duration_ms")]
    pub timeout: Duration,
    pub max_retries: u32,
    /// Sent as a separate system message when set; otherwise the prompt is a
    /// single user message.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system_message: Option<String>,
}

impl Default for CompletionParams {
    fn default() -> Self {
        Self {
            model_name: "mock".into(),
            temperature: 0.0,
            max_output_tokens: 1024,
            timeout: Duration::from_secs(60),
            max_retries: 3,
            system_message: None,
        }
    }
}

impl CompletionParams {
    pub fn for_model(model: impl Into<String>) -> Self {
        Self { model_name: model.into(), ..Default::default() }
    }

    pub fn validate(&self) -> Result<(), LlmError> {
        // Written this way so NaN is rejected too.
        if self.temperature.is_nan() || self.temperature < 0.0 {
            return Err(LlmError::InvalidParams(format!("temperature {} < 0", self.temperature)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionResult {
    pub text: String,
    #[serde(rename = "latency_ms", with = "duration_ms")]
    pub latency: Duration,
    pub attempts: u32,
    pub backend_id: String,
    pub degenerate_flags: BTreeSet<DegenerateFlag>,
}

impl CompletionResult {
    pub fn is_degenerate(&self) -> bool {
        !self.degenerate_flags.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BackendError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("rate limited")]
    RateLimited { retry_after: Option<Duration> },
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("no fixture for prompt hash {hash}")]
    FixtureMiss { hash: String },
    #[error("HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("invalid response: {0}")]
    InvalidResponse(String),
}

impl BackendError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, BackendError::Transport(_) | BackendError::RateLimited { .. })
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LlmError {
    #[error("gave up after {attempts} attempt(s): {last}")]
    Exhausted { attempts: u32, last: BackendError },
    #[error(transparent)]
    Backend(BackendError),
    #[error("invalid completion parameters: {0}")]
    InvalidParams(String),
}

/// Delay before retry `n` (0-based) is `base * 2^n`, capped at `max_delay`.
/// A server-provided retry-after wins when it is longer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetryPolicy {
    #[serde(with = "duration_ms")]
    pub base_delay: Duration,
    #[serde(with = "duration_ms")]
    pub max_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self { base_delay: Duration::from_millis(500), max_delay: Duration::from_secs(30) }
    }
}

impl RetryPolicy {
    pub fn immediate() -> Self {
        Self { base_delay: Duration::ZERO, max_delay: Duration::ZERO }
    }

    pub fn delay(&self, retry: u32, hint: Option<Duration>) -> Duration {
        let exp = self.base_delay.saturating_mul(2u32.saturating_pow(retry.min(20)));
        exp.min(self.max_delay).max(hint.unwrap_or_default())
    }
}

/// Anything that can turn a prompt into text.
pub trait Backend: Send + Sync {
    fn id(&self) -> &str;
    fn send(&self, prompt: &RenderedPrompt, params: &CompletionParams) -> Result<String, BackendError>;
}

/// A backend plus retry policy, rate limiter and recorder. Cheap to clone;
/// clones share the limiter and the ledger.
#[derive(Clone)]
pub struct Client {
    backend: Arc<dyn Backend>,
    retry: RetryPolicy,
    limiter: Option<Arc<RateLimiter>>,
    recorder: Option<Arc<Recorder>>,
}

impl Client {
    pub fn new(backend: Arc<dyn Backend>) -> Self {
        Self { backend, retry: RetryPolicy::default(), limiter: None, recorder: None }
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn with_rate_limit(mut self, limiter: Arc<RateLimiter>) -> Self {
        self.limiter = Some(limiter);
        self
    }

    pub fn with_recorder(mut self, recorder: Arc<Recorder>) -> Self {
        self.recorder = Some(recorder);
        self
    }

    pub fn backend_id(&self) -> &str {
        self.backend.id()
    }

    pub fn recorder(&self) -> Option<&Arc<Recorder>> {
        self.recorder.as_ref()
    }

    /// The ordered call ledger, or an empty list when recording is off.
    pub fn record_calls(&self) -> Vec<CallRecord> {
        self.recorder.as_ref().map(|r| r.records()).unwrap_or_default()
    }

    pub fn complete(
        &self,
        prompt: &RenderedPrompt,
        params: &CompletionParams,
    ) -> Result<CompletionResult, LlmError> {
        params.validate()?;
        let sequence = self.recorder.as_ref().map(|r| r.next_sequence());
        let started = Instant::now();
        let mut attempt_starts = Vec::new();
        let mut attempts = 0u32;

        let outcome = loop {
            let t = match &self.limiter {
                Some(l) => l.acquire(),
                None => Instant::now(),
            };
            if let Some(r) = &self.recorder {
                attempt_starts.push(r.since_epoch(t));
            }
            attempts += 1;
            match self.backend.send(prompt, params) {
                Ok(text) => {
                    let degenerate_flags = detect_degenerate(&text);
                    break Ok(CompletionResult {
                        text,
                        latency: started.elapsed(),
                        attempts,
                        backend_id: self.backend.id().to_string(),
                        degenerate_flags,
                    });
                }
                Err(e) if e.is_retryable() && attempts <= params.max_retries => {
                    let hint = match &e {
                        BackendError::RateLimited { retry_after } => *retry_after,
                        _ => None,
                    };
                    log::debug!("{}: attempt {attempts} failed ({e}); retrying", self.backend.id());
                    thread::sleep(self.retry.delay(attempts - 1, hint));
                }
                Err(e) if e.is_retryable() => break Err(LlmError::Exhausted { attempts, last: e }),
                Err(e) => break Err(LlmError::Backend(e)),
            }
        };

        if let (Some(rec), Some(sequence)) = (&self.recorder, sequence) {
            rec.push(CallRecord {
                sequence,
                kind: prompt.kind.label(),
                prompt_hash: prompt.hash(),
                prompt: prompt.text.clone(),
                params: params.clone(),
                result: outcome.as_ref().ok().cloned(),
                error: outcome.as_ref().err().map(ToString::to_string),
                timestamp_ms: record::unix_millis(),
                attempt_starts,
            });
        }
        outcome
    }
}
