//! Synthetic datasets and fixture-backed mock clients for pipeline tests.
#![allow(dead_code)]

use std::sync::Arc;

use codemix_core::corpus::{Dataset, Direction, LanguagePair, ParallelExample};
use codemix_core::llm::{Client, MockBackend, MockMode, Recorder};
use codemix_core::prompts::{
    render_extraction, render_kshot, render_rule, render_simple, PromptVariant, RuleId, ShotStyle, ALLOWED_K,
};

const SUBJECTS: [(&str, &str); 6] = [
    ("I", "main"),
    ("My brother", "mera bhai"),
    ("The teacher", "teacher"),
    ("Our team", "hamari team"),
    ("She", "woh"),
    ("The manager", "manager"),
];
const PREDICATES: [(&str, &str); 5] = [
    ("will finish the project tomorrow", "kal project finish karega"),
    ("is reading an interesting book", "ek interesting book padh raha hai"),
    ("wants to watch the new movie", "nayi movie dekhna chahta hai"),
    ("called the office this morning", "ne aaj subah office call kiya"),
    ("likes coffee more than tea", "ko tea se zyada coffee pasand hai"),
];

/// `n` distinct EN/code-mixed pairs with ids 0001.. in file order.
pub fn dataset(pair: LanguagePair, n: usize) -> Dataset {
    let mut examples = Vec::with_capacity(n);
    for i in 0..n {
        let (se, sc) = SUBJECTS[i % SUBJECTS.len()];
        let (pe, pc) = PREDICATES[(i / SUBJECTS.len()) % PREDICATES.len()];
        let round = i / (SUBJECTS.len() * PREDICATES.len());
        let suffix = if round == 0 { String::new() } else { format!(" ({round})") };
        examples.push(ParallelExample {
            id: format!("{:04}", i + 1),
            pair,
            english: format!("{se} {pe}{suffix}."),
            code_mixed: format!("{sc} {pc}{suffix}."),
        });
    }
    Dataset { pair, examples }
}

/// A deterministic imperfect answer so scores are not all 100.
pub fn response_for(ex: &ParallelExample, direction: Direction, salt: usize) -> String {
    let gold = match direction {
        Direction::En2Cm => &ex.code_mixed,
        Direction::Cm2En => &ex.english,
    };
    let idx: usize = ex.id.parse().unwrap_or(0) + salt;
    match idx % 4 {
        0 => gold.clone(),
        1 => format!("Code-Mixed: \"{gold}\""),
        2 => gold.split_whitespace().skip(1).collect::<Vec<_>>().join(" "),
        _ => format!("{gold} yaar"),
    }
}

/// A numbered transcript ending in `final_sentence`.
pub fn transcript(rule: RuleId, english: &str, final_sentence: &str) -> String {
    format!(
        "1. Sentence given: {english}\n2. Intermediate for {rule}: {english} (analysed)\n3. Final code-mixed sentence:\n{final_sentence}\n"
    )
}

/// Fixtures for every k-shot cell and rule chain over `test`, with shots
/// drawn from the front of `pool`.
pub fn fixture_backend(pool: &Dataset, test: &Dataset, direction: Direction) -> MockBackend {
    let pair = test.pair;
    let mut mock = MockBackend::new("mock", MockMode::Strict);
    for (s, style) in [ShotStyle::Alpha, ShotStyle::Beta].into_iter().enumerate() {
        for (ki, k) in ALLOWED_K.into_iter().enumerate() {
            for ex in &test.examples {
                let input = match direction {
                    Direction::En2Cm => &ex.english,
                    Direction::Cm2En => &ex.code_mixed,
                };
                let p = render_kshot(pair, direction, style, k, &pool.examples[..k], input).unwrap();
                mock.insert(&p.text, response_for(ex, direction, s + ki));
            }
        }
    }
    for rule in RuleId::ALL {
        for (i, ex) in test.examples.iter().enumerate() {
            let final_sentence = response_for(ex, Direction::En2Cm, rule.number() as usize);
            let t = transcript(rule, &ex.english, &final_sentence);
            mock.insert(&render_rule(rule, pair, &ex.english).unwrap().text, t.clone());
            // Every third extraction comes back empty to exercise the parser fallback.
            let extracted = if i % 3 == 0 { String::new() } else { final_sentence };
            mock.insert(&render_extraction(&t).unwrap().text, extracted);
        }
    }
    mock
}

pub fn client(mock: MockBackend) -> Client {
    Client::new(Arc::new(mock))
}

pub fn recording_client(mock: MockBackend) -> Client {
    Client::new(Arc::new(mock)).with_recorder(Arc::new(Recorder::new()))
}

/// Fixtures for the transliteration bridge: Roman input to a marker string
/// in the matrix script, then to English gold.
pub fn bridge_backend(test: &Dataset) -> MockBackend {
    let mut mock = MockBackend::new("mock", MockMode::Strict);
    for ex in &test.examples {
        let native = format!("স্ক্রিপ্ট {}", ex.id);
        mock.insert(&render_simple(PromptVariant::TranslitToMatrix, test.pair, &ex.code_mixed).unwrap().text, native.clone());
        mock.insert(&render_simple(PromptVariant::TranslateCm2En, test.pair, &native).unwrap().text, ex.english.clone());
    }
    mock
}

pub const CHAT_DOC: &str = "Fine-tuning adapts a pretrained model to a narrow task with a small labelled dataset. \
It updates the model weights, unlike prompting. Retrieval augmented generation fetches relevant chunks \
from an index before answering. Chunks are stored as parent and leaf nodes. Code-mixed queries are \
translated to English before retrieval because the index is in English.";

/// Answers each chat stage with a fixed, stage-specific string.
pub fn chat_backend() -> impl codemix_core::llm::Backend {
    codemix_core::llm::FnBackend::new("scripted", |p: &codemix_core::prompts::RenderedPrompt| {
        Ok(match p.kind.variant {
            PromptVariant::TranslitToMatrix => "ফাইনটিউনিং এর সম্পর্কে বলো".to_string(),
            PromptVariant::TranslateCm2En => "Tell me about fine-tuning".to_string(),
            PromptVariant::ChatAnswer => "Fine-tuning adapts a pretrained model to a narrow task.".to_string(),
            PromptVariant::ChatToCm => "Fine-tuning ek pretrained model ko narrow task ke liye adapt karta hai.".to_string(),
            other => format!("unexpected {other:?}"),
        })
    })
}

/// `kind` labels of recorded calls, in sequence order.
pub fn call_kinds(client: &Client) -> Vec<String> {
    client.record_calls().into_iter().map(|r| r.kind).collect()
}
