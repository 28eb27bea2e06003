#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::sync::Arc;

use axum::body::{to_bytes, Body};
use axum::http::{Request, StatusCode};
use axum::Router;
use codemix_cli::server::{router, AppState, ChatResponse, PairInfo};
use codemix_core::chatbot::{build_index, ChatConfig, ChatEngine};
use codemix_core::llm::{BackendError, Client, FnBackend, RetryPolicy};
use codemix_core::prompts::RenderedPrompt;
use tower::ServiceExt;

fn ready_state(client: Client, token: Option<String>) -> Arc<AppState> {
    let state = AppState::new(6, token);
    let index = build_index(support::scripted::CHAT_DOC, 8, 32).unwrap();
    state.set_engine(ChatEngine::new(Arc::new(index), client, ChatConfig::default()));
    state
}

fn app(state: Arc<AppState>) -> Router {
    router(state, None).unwrap()
}

async fn send(app: Router, req: Request<Body>) -> (StatusCode, serde_json::Value) {
    let resp = app.oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = to_bytes(resp.into_body(), 1 << 20).await.unwrap();
    (status, serde_json::from_slice(&bytes).unwrap_or(serde_json::Value::Null))
}

fn chat(body: serde_json::Value) -> Request<Body> {
    Request::post("/chat")
        .header("content-type", "application/json")
        .body(Body::from(body.to_string()))
        .unwrap()
}

fn scripted() -> Client {
    Client::new(Arc::new(support::scripted::chat_backend()))
}

#[tokio::test]
async fn chat_round_trip() {
    let state = ready_state(scripted(), None);
    let (status, body) = send(app(state.clone()), chat(serde_json::json!({"pair": "en-hi", "message": "fine-tuning kya hai?"}))).await;
    assert_eq!(status, StatusCode::OK);
    let resp: ChatResponse = serde_json::from_value(body).unwrap();
    assert!(!resp.answer_cm.is_empty() && !resp.answer_en.is_empty());
    assert!(!resp.sources.is_empty());
    assert!(resp.session_id.starts_with("s-"));

    let again = serde_json::json!({"pair": "en-hi", "message": "aur batao", "session_id": resp.session_id});
    let (status, body) = send(app(state), chat(again)).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["session_id"], serde_json::json!(resp.session_id));
}

#[tokio::test]
async fn bad_requests() {
    let state = ready_state(scripted(), None);
    for body in [
        serde_json::json!({"pair": "en-de", "message": "hallo"}),
        serde_json::json!({"pair": "en-hi", "message": "   "}),
        serde_json::json!({"message": "no pair"}),
    ] {
        let (status, resp) = send(app(state.clone()), chat(body.clone())).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{body}");
        assert!(resp["error"].is_string());
    }
}

#[tokio::test]
async fn backend_failure_is_502() {
    let down = FnBackend::new("down", |_: &RenderedPrompt| Err(BackendError::Transport("refused".into())));
    let client = Client::new(Arc::new(down)).with_retry(RetryPolicy::immediate());
    let (status, _) = send(app(ready_state(client, None)), chat(serde_json::json!({"pair": "en-bn", "message": "ki?"}))).await;
    assert_eq!(status, StatusCode::BAD_GATEWAY);
}

#[tokio::test]
async fn unavailable_until_index_loads() {
    let state = AppState::new(6, None);
    let (status, _) = send(app(state.clone()), chat(serde_json::json!({"pair": "en-hi", "message": "hi"}))).await;
    assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE);
    let (status, body) = send(app(state), Request::get("/health").body(Body::empty()).unwrap()).await;
    assert_eq!((status, body["status"].as_str()), (StatusCode::SERVICE_UNAVAILABLE, Some("loading")));

    let (status, body) = send(app(ready_state(scripted(), None)), Request::get("/health").body(Body::empty()).unwrap()).await;
    assert_eq!((status, body["status"].as_str()), (StatusCode::OK, Some("ok")));
}

#[tokio::test]
async fn pairs_lists_five() {
    let (status, body) = send(app(AppState::new(6, None)), Request::get("/pairs").body(Body::empty()).unwrap()).await;
    assert_eq!(status, StatusCode::OK);
    let pairs: Vec<PairInfo> = serde_json::from_value(body).unwrap();
    let codes: Vec<&str> = pairs.iter().map(|p| p.code.as_str()).collect();
    assert_eq!(codes, ["en-hi", "en-bn", "en-gu", "en-fr", "en-es"]);
    assert_eq!(pairs[0].name, "English-Hindi");
}

#[tokio::test]
async fn cors_and_token() {
    let state = ready_state(scripted(), Some("secret".into()));
    let preflight = Request::options("/chat")
        .header("origin", "http://localhost:5173")
        .header("access-control-request-method", "POST")
        .body(Body::empty())
        .unwrap();
    let resp = app(state.clone()).oneshot(preflight).await.unwrap();
    assert_eq!(resp.headers()["access-control-allow-origin"], "*");

    let body = serde_json::json!({"pair": "en-hi", "message": "hi"});
    let (status, _) = send(app(state.clone()), chat(body.clone())).await;
    assert_eq!(status, StatusCode::UNAUTHORIZED);
    let mut req = chat(body);
    req.headers_mut().insert("authorization", "Bearer secret".parse().unwrap());
    let (status, _) = send(app(state), req).await;
    assert_eq!(status, StatusCode::OK);
}

#[tokio::test]
async fn responses_repeat_across_restarts() {
    let body = serde_json::json!({"pair": "en-bn", "message": "finetuning er somporke bolo"});
    let (_, a) = send(app(ready_state(scripted(), None)), chat(body.clone())).await;
    let (_, b) = send(app(ready_state(scripted(), None)), chat(body)).await;
    assert_eq!(a, b);
}
