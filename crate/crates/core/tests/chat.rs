mod support;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use codemix_core::chatbot::{build_index, ChatConfig, ChatEngine, ChatError, ChatStage, Role, Sessions};
use codemix_core::corpus::LanguagePair;
use codemix_core::llm::{BackendError, Client, FnBackend, Recorder, RetryPolicy};
use codemix_core::prompts::{HistoryEntry, PromptVariant, RenderedPrompt};
use support::scripted;

fn engine(client: Client) -> ChatEngine {
    let index = build_index(scripted::CHAT_DOC, 8, 32).unwrap();
    ChatEngine::new(Arc::new(index), client, ChatConfig::default())
}

fn recording() -> Client {
    Client::new(Arc::new(scripted::chat_backend())).with_recorder(Arc::new(Recorder::new()))
}

#[test]
fn bengali_query_takes_four_calls() {
    let client = recording();
    let ex = engine(client.clone()).answer("finetuning er somporke bolo", LanguagePair::EnBn, &[]).unwrap();
    assert_eq!(scripted::call_kinds(&client), ["transliterate", "translate-cm2en", "chat-answer", "chat-to-cm"]);
    assert_eq!(ex.user.text_en, "Tell me about fine-tuning");
    assert_eq!(ex.assistant.role, Role::Assistant);
    assert!(ex.assistant.text_cm.starts_with("Fine-tuning ek"));
    assert!(!ex.assistant.source_node_ids.is_empty() && ex.assistant.source_node_ids.len() <= 6);
    assert!(ex.user.source_node_ids.is_empty());
}

#[test]
fn hindi_query_skips_transliteration() {
    let client = recording();
    engine(client.clone()).answer("fine-tuning ke baare mein batao", LanguagePair::EnHi, &[]).unwrap();
    assert_eq!(scripted::call_kinds(&client), ["translate-cm2en", "chat-answer", "chat-to-cm"]);
}

#[test]
fn bridge_pairs_are_configurable() {
    let client = recording();
    let mut e = engine(client.clone());
    e.config.bridge_pairs.push(LanguagePair::EnGu);
    e.answer("finetuning vishe kaho", LanguagePair::EnGu, &[]).unwrap();
    assert_eq!(scripted::call_kinds(&client).len(), 4);
}

#[test]
fn empty_query_makes_no_calls() {
    let client = recording();
    let err = engine(client.clone()).answer("   ", LanguagePair::EnBn, &[]).unwrap_err();
    assert!(matches!(err, ChatError::EmptyQuery));
    assert!(client.record_calls().is_empty());
}

#[test]
fn degenerate_answer_is_retried_once() {
    let answers = Arc::new(AtomicUsize::new(0));
    let seen = answers.clone();
    let backend = FnBackend::new("flaky", move |p: &RenderedPrompt| {
        Ok(match p.kind.variant {
            PromptVariant::ChatAnswer if seen.fetch_add(1, Ordering::SeqCst) == 0 => String::new(),
            PromptVariant::ChatAnswer => "An answer.".into(),
            _ => "x y".into(),
        })
    });
    let client = Client::new(Arc::new(backend)).with_recorder(Arc::new(Recorder::new()));
    engine(client.clone()).answer("q", LanguagePair::EnHi, &[]).unwrap();
    assert_eq!(answers.load(Ordering::SeqCst), 2);
    assert_eq!(client.record_calls().len(), 4);

    let always_empty = FnBackend::new("empty", |p: &RenderedPrompt| {
        Ok(if p.kind.variant == PromptVariant::ChatAnswer { String::new() } else { "x".into() })
    });
    let err = engine(Client::new(Arc::new(always_empty))).answer("q", LanguagePair::EnHi, &[]).unwrap_err();
    assert!(matches!(err, ChatError::Degenerate { stage: ChatStage::Answer }));
    assert!(err.is_backend());
}

#[test]
fn backend_failure_names_the_stage() {
    let down = FnBackend::new("down", |_: &RenderedPrompt| Err(BackendError::Transport("refused".into())));
    let client = Client::new(Arc::new(down)).with_retry(RetryPolicy::immediate());
    let err = engine(client).answer("q", LanguagePair::EnBn, &[]).unwrap_err();
    assert!(matches!(err, ChatError::Backend { stage: ChatStage::Transliterate, .. }), "{err}");
}

#[test]
fn history_is_capped_and_shown_to_the_answer_prompt() {
    let client = recording();
    let history: Vec<HistoryEntry> = (0..10)
        .map(|i| HistoryEntry { question_en: format!("old question {i}"), answer_en: format!("old answer {i}") })
        .collect();
    engine(client.clone()).answer("aur batao", LanguagePair::EnHi, &history).unwrap();
    let answer_prompt = client.record_calls().into_iter().find(|r| r.kind == "chat-answer").unwrap().prompt;
    assert!(answer_prompt.contains("old question 9") && answer_prompt.contains("old question 4"));
    assert!(!answer_prompt.contains("old question 3"));

    let sessions = Sessions::new(2);
    for i in 0..3 {
        sessions.push("a", HistoryEntry { question_en: i.to_string(), answer_en: String::new() });
    }
    assert_eq!(sessions.history("a").iter().map(|h| h.question_en.as_str()).collect::<Vec<_>>(), ["1", "2"]);
    assert!(sessions.history("b").is_empty());
}

#[test]
fn answers_are_deterministic() {
    let a = engine(recording()).answer("finetuning er somporke bolo", LanguagePair::EnBn, &[]).unwrap();
    let b = engine(recording()).answer("finetuning er somporke bolo", LanguagePair::EnBn, &[]).unwrap();
    assert_eq!(a, b);
}
