//! HTTP front end for the chatbot: `POST /chat`, `GET /pairs`, `GET /health`.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, OnceLock};

use axum::extract::rejection::JsonRejection;
use axum::extract::State;
use axum::http::{HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use codemix_core::chatbot::{ChatEngine, ChatError, Sessions};
use codemix_core::corpus::LanguagePair;
use codemix_core::prompts::prompt_hash;
use serde::{Deserialize, Serialize};
use tower_http::cors::{Any, CorsLayer};

pub struct AppState {
    engine: OnceLock<ChatEngine>,
    sessions: Sessions,
    counter: AtomicU64,
    token: Option<String>,
}

impl AppState {
    pub fn new(history: usize, token: Option<String>) -> Arc<Self> {
        Arc::new(Self {
            engine: OnceLock::new(),
            sessions: Sessions::new(history),
            counter: AtomicU64::new(0),
            token,
        })
    }

    /// Makes the engine available; requests get 503 until this runs.
    pub fn set_engine(&self, engine: ChatEngine) {
        if self.engine.set(engine).is_err() {
            log::warn!("chat engine already set");
        }
    }

    pub fn is_ready(&self) -> bool {
        self.engine.get().is_some()
    }
}

#[derive(Debug, Deserialize)]
pub struct ChatRequest {
    pub pair: String,
    #[serde(default)]
    pub message: String,
    #[serde(default)]
    pub session_id: Option<String>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct ChatResponse {
    pub answer_cm: String,
    pub answer_en: String,
    pub sources: Vec<String>,
    pub session_id: String,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct PairInfo {
    pub code: String,
    pub name: String,
    pub matrix_language: String,
}

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    (status, Json(serde_json::json!({ "error": message.into() }))).into_response()
}

async fn health(State(state): State<Arc<AppState>>) -> Response {
    if state.is_ready() {
        Json(serde_json::json!({ "status": "ok" })).into_response()
    } else {
        (StatusCode::SERVICE_UNAVAILABLE, Json(serde_json::json!({ "status": "loading" }))).into_response()
    }
}

async fn pairs() -> Json<Vec<PairInfo>> {
    Json(
        LanguagePair::ALL
            .iter()
            .map(|p| PairInfo {
                code: p.code().to_string(),
                name: p.display_name(),
                matrix_language: p.matrix_language().to_string(),
            })
            .collect(),
    )
}

fn authorized(state: &AppState, headers: &HeaderMap) -> bool {
    let Some(token) = &state.token else {
        return true;
    };
    headers
        .get("authorization")
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.strip_prefix("Bearer "))
        .is_some_and(|v| v == token)
}

async fn chat(
    State(state): State<Arc<AppState>>,
    headers: HeaderMap,
    body: Result<Json<ChatRequest>, JsonRejection>,
) -> Response {
    if !authorized(&state, &headers) {
        return error(StatusCode::UNAUTHORIZED, "missing or wrong bearer token");
    }
    let Json(req) = match body {
        Ok(b) => b,
        Err(e) => return error(StatusCode::BAD_REQUEST, e.body_text()),
    };
    let pair: LanguagePair = match req.pair.parse() {
        Ok(p) => p,
        Err(e) => return error(StatusCode::BAD_REQUEST, format!("{e}")),
    };
    let message = req.message.trim().to_string();
    if message.is_empty() {
        return error(StatusCode::BAD_REQUEST, "message is empty");
    }
    let Some(engine) = state.engine.get().cloned() else {
        return error(StatusCode::SERVICE_UNAVAILABLE, "index is still loading");
    };
    let session_id = req.session_id.filter(|s| !s.trim().is_empty()).unwrap_or_else(|| {
        let n = state.counter.fetch_add(1, Ordering::Relaxed);
        format!("s-{}", &prompt_hash(&format!("{pair}|{message}|{n}"))[..16])
    });
    let history = state.sessions.history(&session_id);
    let result = tokio::task::spawn_blocking(move || engine.answer(&message, pair, &history)).await;
    match result {
        Ok(Ok(exchange)) => {
            state.sessions.push(&session_id, exchange.history_entry());
            Json(ChatResponse {
                answer_cm: exchange.assistant.text_cm,
                answer_en: exchange.assistant.text_en,
                sources: exchange.assistant.source_node_ids,
                session_id,
            })
            .into_response()
        }
        Ok(Err(e @ ChatError::EmptyQuery)) => error(StatusCode::BAD_REQUEST, e.to_string()),
        Ok(Err(e)) if e.is_backend() => error(StatusCode::BAD_GATEWAY, e.to_string()),
        Ok(Err(e)) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}

/// Routes with CORS for `cors_origin`, or any origin when `None`.
pub fn router(state: Arc<AppState>, cors_origin: Option<&str>) -> anyhow::Result<Router> {
    let cors = CorsLayer::new().allow_methods(Any).allow_headers(Any);
    let cors = match cors_origin {
        Some(origin) => cors.allow_origin(origin.parse::<HeaderValue>()?),
        None => cors.allow_origin(Any),
    };
    Ok(Router::new()
        .route("/chat", post(chat))
        .route("/pairs", get(pairs))
        .route("/health", get(health))
        .layer(cors)
        .with_state(state))
}
