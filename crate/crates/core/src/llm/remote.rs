use std::env;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{Backend, BackendError, CompletionParams};
use crate::prompts::RenderedPrompt;

pub const DEFAULT_ENDPOINT: &str = "https://api.openai.com/v1/chat/completions";

/// Name of the environment variable holding the API key for `backend_id`,
/// e.g. `CODEMIX_API_KEY_GPT4` for `gpt4`.
pub fn api_key_var(backend_id: &str) -> String {
    let suffix: String = backend_id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_uppercase() } else { '_' })
        .collect();
    format!("CODEMIX_API_KEY_{suffix}")
}

#[derive(Serialize)]
struct Message<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: Vec<Message<'a>>,
    temperature: f64,
    max_tokens: u32,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ChoiceMessage,
}

#[derive(Deserialize)]
struct ChoiceMessage {
    #[serde(default)]
    content: Option<String>,
}

/// Chat-completion backend speaking the common `/chat/completions` JSON shape.
pub struct RemoteBackend {
    id: String,
    endpoint: String,
    api_key: Option<String>,
    agent: ureq::Agent,
}

impl RemoteBackend {
    pub fn new(id: impl Into<String>, endpoint: impl Into<String>, api_key: Option<String>) -> Self {
        let config = ureq::Agent::config_builder().http_status_as_error(false).build();
        Self {
            id: id.into(),
            endpoint: endpoint.into(),
            api_key,
            agent: ureq::Agent::new_with_config(config),
        }
    }

    /// Reads the key from `CODEMIX_API_KEY_<ID>`. A missing key is reported
    /// as an authentication error on first use.
    pub fn from_env(id: impl Into<String>, endpoint: impl Into<String>) -> Self {
        let id = id.into();
        let key = env::var(api_key_var(&id)).ok().filter(|k| !k.is_empty());
        Self::new(id, endpoint, key)
    }
}

fn retry_after(resp: &ureq::http::Response<ureq::Body>) -> Option<Duration> {
    resp.headers()
        .get("retry-after")
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.trim().parse::<f64>().ok())
        .map(Duration::from_secs_f64)
}

impl Backend for RemoteBackend {
    fn id(&self) -> &str {
        &self.id
    }

    fn send(&self, prompt: &RenderedPrompt, params: &CompletionParams) -> Result<String, BackendError> {
        let Some(key) = &self.api_key else {
            return Err(BackendError::Auth(format!("{} is not set", api_key_var(&self.id))));
        };
        let mut messages = Vec::new();
        if let Some(system) = &params.system_message {
            messages.push(Message { role: "system", content: system });
        }
        messages.push(Message { role: "user", content: &prompt.text });
        let body = ChatRequest {
            model: &params.model_name,
            messages,
            temperature: params.temperature,
            max_tokens: params.max_output_tokens,
        };
        let mut resp = self
            .agent
            .post(&self.endpoint)
            .config()
            .timeout_global(Some(params.timeout))
            .build()
            .header("Authorization", &format!("Bearer {key}"))
            .send_json(&body)
            .map_err(|e| BackendError::Transport(e.to_string()))?;

        let status = resp.status().as_u16();
        match status {
            200..=299 => {}
            401 | 403 => {
                let text = resp.body_mut().read_to_string().unwrap_or_default();
                return Err(BackendError::Auth(format!("HTTP {status}: {text}")));
            }
            429 => return Err(BackendError::RateLimited { retry_after: retry_after(&resp) }),
            500..=599 | 408 => {
                return Err(BackendError::Transport(format!("HTTP {status}")));
            }
            _ => {
                let text = resp.body_mut().read_to_string().unwrap_or_default();
                return Err(BackendError::Http { status, body: text });
            }
        }
        let parsed: ChatResponse = resp
            .body_mut()
            .read_json()
            .map_err(|e| BackendError::InvalidResponse(e.to_string()))?;
        parsed
            .choices
            .into_iter()
            .next()
            .map(|c| c.message.content.unwrap_or_default())
            .ok_or_else(|| BackendError::InvalidResponse("response has no choices".into()))
    }
}
