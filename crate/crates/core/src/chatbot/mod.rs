//! Retrieval-augmented chatbot: hierarchical index, leaf retrieval with
//! auto-merging and reranking, and the code-mixed question/answer pipeline.

mod index;
mod remote;
mod retrieval;

use std::collections::{HashMap, VecDeque};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

pub use index::{build_index, Index, IndexNode, NodeLevel, DEFAULT_LEAF_SIZE, DEFAULT_PARENT_SIZE};
pub use remote::{RemoteEmbeddingScorer, RemoteReranker};
pub use retrieval::{
    auto_merge, no_parent_with_child, rerank, retrieve, terms, Bm25Scorer, LeafScorer, OverlapReranker, Reranker,
    RetrievalResult, ScoredNode, Stage, DEFAULT_KEEP, DEFAULT_TOP,
};

use crate::corpus::{CleanConfig, LanguagePair};
use crate::llm::{Client, CompletionParams, LlmError};
use crate::prompts::{render_chat_answer, render_simple, HistoryEntry, PromptError, PromptVariant, RenderedPrompt};

#[derive(Debug, thiserror::Error)]
pub enum ChatError {
    #[error("document is empty")]
    EmptyDocument,
    #[error("leaf size {leaf_size} must be positive and below parent size {parent_size}")]
    InvalidSizes { leaf_size: usize, parent_size: usize },
    #[error("query is empty")]
    EmptyQuery,
    #[error("expected {expected:?} retrieval result, got {got:?}")]
    StageMismatch { expected: Stage, got: Stage },
    #[error("unknown node {0}")]
    UnknownNode(String),
    #[error("index is corrupt: {0}")]
    Corrupt(String),
    #[error("remote scorer: {0}")]
    Remote(String),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error("{stage} step failed: {source}")]
    Backend { stage: ChatStage, source: LlmError },
    #[error("{stage} step produced degenerate output")]
    Degenerate { stage: ChatStage },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl ChatError {
    /// Errors caused by the model service rather than the request.
    pub fn is_backend(&self) -> bool {
        matches!(self, ChatError::Backend { .. } | ChatError::Degenerate { .. } | ChatError::Remote(_))
    }
}

/// Backend-calling steps of the answer pipeline, in call order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChatStage {
    Transliterate,
    TranslateToEn,
    Answer,
    TranslateToCm,
}

impl std::fmt::Display for ChatStage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ChatStage::Transliterate => "transliterate",
            ChatStage::TranslateToEn => "translate-to-en",
            ChatStage::Answer => "answer",
            ChatStage::TranslateToCm => "translate-to-cm",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Role {
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatTurn {
    pub role: Role,
    pub pair: LanguagePair,
    pub text_cm: String,
    pub text_en: String,
    /// Always empty on user turns.
    pub source_node_ids: Vec<String>,
}

/// A question turn and the answer produced for it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatExchange {
    pub user: ChatTurn,
    pub assistant: ChatTurn,
}

impl ChatExchange {
    pub fn history_entry(&self) -> HistoryEntry {
        HistoryEntry { question_en: self.user.text_en.clone(), answer_en: self.assistant.text_en.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatConfig {
    pub top: usize,
    pub keep: usize,
    /// Earlier exchanges included in the answer prompt.
    pub history_turns: usize,
    /// Pairs whose queries are transliterated to the matrix script first.
    pub bridge_pairs: Vec<LanguagePair>,
    pub strict_retrieval: bool,
    pub params: CompletionParams,
    pub clean: CleanConfig,
}

impl Default for ChatConfig {
    fn default() -> Self {
        Self {
            top: DEFAULT_TOP,
            keep: DEFAULT_KEEP,
            history_turns: 6,
            bridge_pairs: vec![LanguagePair::EnBn],
            strict_retrieval: false,
            params: CompletionParams::default(),
            clean: CleanConfig::default(),
        }
    }
}

/// Everything one answer needs. Cheap to clone and shareable across
/// request handlers.
#[derive(Clone)]
pub struct ChatEngine {
    pub index: Arc<Index>,
    pub scorer: Arc<dyn LeafScorer>,
    pub reranker: Arc<dyn Reranker>,
    pub client: Client,
    pub config: ChatConfig,
}

impl ChatEngine {
    /// BM25 retrieval and term-overlap reranking.
    pub fn new(index: Arc<Index>, client: Client, config: ChatConfig) -> Self {
        Self {
            index,
            scorer: Arc::new(Bm25Scorer::default()),
            reranker: Arc::new(OverlapReranker),
            client,
            config,
        }
    }

    pub fn with_scorer(mut self, scorer: Arc<dyn LeafScorer>) -> Self {
        self.scorer = scorer;
        self
    }

    pub fn with_reranker(mut self, reranker: Arc<dyn Reranker>) -> Self {
        self.reranker = reranker;
        self
    }

    fn step(&self, stage: ChatStage, prompt: &RenderedPrompt, retries_on_degenerate: u32) -> Result<String, ChatError> {
        for _ in 0..=retries_on_degenerate {
            let result = self
                .client
                .complete(prompt, &self.config.params)
                .map_err(|source| ChatError::Backend { stage, source })?;
            if !result.is_degenerate() {
                return Ok(self.config.clean.clean(&result.text));
            }
            log::warn!("{stage}: degenerate output {:?}", result.degenerate_flags);
        }
        Err(ChatError::Degenerate { stage })
    }

    /// Top-ranked nodes for an English query.
    pub fn sources(&self, query_en: &str) -> Result<RetrievalResult, ChatError> {
        let raw = retrieve(&self.index, self.scorer.as_ref(), query_en, self.config.top, self.config.strict_retrieval)?;
        let merged = auto_merge(raw, &self.index)?;
        rerank(merged, self.reranker.as_ref(), query_en, self.config.keep)
    }

    /// Answers a code-mixed question in the same code-mixed pair. The query
    /// is validated before any backend call.
    pub fn answer(&self, query_cm: &str, pair: LanguagePair, history: &[HistoryEntry]) -> Result<ChatExchange, ChatError> {
        let query_cm = query_cm.trim();
        if query_cm.is_empty() {
            return Err(ChatError::EmptyQuery);
        }
        let mut query = query_cm.to_string();
        if self.config.bridge_pairs.contains(&pair) {
            let p = render_simple(PromptVariant::TranslitToMatrix, pair, &query)?;
            query = self.step(ChatStage::Transliterate, &p, 0)?;
        }
        let p = render_simple(PromptVariant::TranslateCm2En, pair, &query)?;
        let query_en = self.step(ChatStage::TranslateToEn, &p, 0)?;

        let sources = self.sources(&query_en)?;
        let context: Vec<&str> = sources.nodes.iter().map(|n| n.node.text.as_str()).collect();
        let recent = &history[history.len().saturating_sub(self.config.history_turns)..];
        let p = render_chat_answer(pair, &context, recent, &query_en)?;
        let answer_en = self.step(ChatStage::Answer, &p, 1)?;

        let p = render_simple(PromptVariant::ChatToCm, pair, &answer_en)?;
        let answer_cm = self.step(ChatStage::TranslateToCm, &p, 0)?;

        Ok(ChatExchange {
            user: ChatTurn {
                role: Role::User,
                pair,
                text_cm: query_cm.to_string(),
                text_en: query_en,
                source_node_ids: Vec::new(),
            },
            assistant: ChatTurn {
                role: Role::Assistant,
                pair,
                text_cm: answer_cm,
                text_en: answer_en,
                source_node_ids: sources.ids(),
            },
        })
    }
}

/// Per-session history, capped at `limit` exchanges. Sessions never see each
/// other's turns.
#[derive(Debug, Default)]
pub struct Sessions {
    limit: usize,
    inner: Mutex<HashMap<String, VecDeque<HistoryEntry>>>,
}

impl Sessions {
    pub fn new(limit: usize) -> Self {
        Self { limit, inner: Mutex::new(HashMap::new()) }
    }

    pub fn history(&self, session_id: &str) -> Vec<HistoryEntry> {
        let inner = self.inner.lock().expect("session store poisoned");
        inner.get(session_id).map(|h| h.iter().cloned().collect()).unwrap_or_default()
    }

    pub fn push(&self, session_id: &str, entry: HistoryEntry) {
        let mut inner = self.inner.lock().expect("session store poisoned");
        let h = inner.entry(session_id.to_string()).or_default();
        h.push_back(entry);
        while h.len() > self.limit {
            h.pop_front();
        }
    }
}
