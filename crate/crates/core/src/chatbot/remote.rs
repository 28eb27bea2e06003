//! Embedding scorer and cross-encoder reranker behind HTTP endpoints.

use std::collections::HashMap;
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::index::Index;
use super::retrieval::{LeafScorer, Reranker};
use super::ChatError;

fn agent(timeout: Duration) -> ureq::Agent {
    let config = ureq::Agent::config_builder()
        .timeout_global(Some(timeout))
        .build();
    ureq::Agent::new_with_config(config)
}

fn post<B: Serialize, R: for<'de> Deserialize<'de>>(
    agent: &ureq::Agent,
    endpoint: &str,
    key: Option<&str>,
    body: &B,
) -> Result<R, ChatError> {
    let mut req = agent.post(endpoint);
    if let Some(k) = key {
        req = req.header("Authorization", &format!("Bearer {k}"));
    }
    let mut resp = req.send_json(body).map_err(|e| ChatError::Remote(e.to_string()))?;
    resp.body_mut()
        .read_json()
        .map_err(|e| ChatError::Remote(format!("bad response from {endpoint}: {e}")))
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    model: &'a str,
    input: Vec<&'a str>,
}

#[derive(Deserialize)]
struct EmbedResponse {
    data: Vec<Embedding>,
}

#[derive(Deserialize)]
struct Embedding {
    index: usize,
    embedding: Vec<f64>,
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Cosine similarity between embeddings from an `/embeddings`-style
/// endpoint. Leaf vectors are cached by node id.
pub struct RemoteEmbeddingScorer {
    endpoint: String,
    model: String,
    api_key: Option<String>,
    agent: ureq::Agent,
    cache: Mutex<HashMap<String, Vec<f64>>>,
}

impl RemoteEmbeddingScorer {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>, api_key: Option<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            model: model.into(),
            api_key,
            agent: agent(Duration::from_secs(60)),
            cache: Mutex::new(HashMap::new()),
        }
    }

    fn embed(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>, ChatError> {
        let resp: EmbedResponse = post(
            &self.agent,
            &self.endpoint,
            self.api_key.as_deref(),
            &EmbedRequest { model: &self.model, input: texts.to_vec() },
        )?;
        let mut out = vec![Vec::new(); texts.len()];
        for e in resp.data {
            if let Some(slot) = out.get_mut(e.index) {
                *slot = e.embedding;
            }
        }
        if out.iter().any(Vec::is_empty) {
            return Err(ChatError::Remote("embedding response is missing vectors".into()));
        }
        Ok(out)
    }
}

impl LeafScorer for RemoteEmbeddingScorer {
    fn id(&self) -> &str {
        "remote-embedding"
    }

    fn score_leaves(&self, index: &Index, query: &str) -> Result<Vec<f64>, ChatError> {
        let mut cache = self.cache.lock().expect("embedding cache poisoned");
        let missing: Vec<&super::IndexNode> =
            index.leaves.iter().filter(|l| !cache.contains_key(&l.id)).collect();
        if !missing.is_empty() {
            let texts: Vec<&str> = missing.iter().map(|l| l.text.as_str()).collect();
            for (leaf, v) in missing.iter().zip(self.embed(&texts)?) {
                cache.insert(leaf.id.clone(), v);
            }
        }
        let q = self.embed(&[query])?.remove(0);
        Ok(index.leaves.iter().map(|l| cosine(&q, &cache[&l.id])).collect())
    }
}

#[derive(Serialize)]
struct RerankRequest<'a> {
    model: &'a str,
    query: &'a str,
    documents: &'a [&'a str],
}

#[derive(Deserialize)]
struct RerankResponse {
    results: Vec<RerankHit>,
}

#[derive(Deserialize)]
struct RerankHit {
    index: usize,
    relevance_score: f64,
}

/// Cross-encoder reranker speaking the common `/rerank` JSON shape.
pub struct RemoteReranker {
    endpoint: String,
    model: String,
    api_key: Option<String>,
    agent: ureq::Agent,
}

impl RemoteReranker {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>, api_key: Option<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            model: model.into(),
            api_key,
            agent: agent(Duration::from_secs(60)),
        }
    }
}

impl Reranker for RemoteReranker {
    fn id(&self) -> &str {
        "remote-rerank"
    }

    fn score_texts(&self, query: &str, texts: &[&str]) -> Result<Vec<f64>, ChatError> {
        if texts.is_empty() {
            return Ok(Vec::new());
        }
        let resp: RerankResponse = post(
            &self.agent,
            &self.endpoint,
            self.api_key.as_deref(),
            &RerankRequest { model: &self.model, query, documents: texts },
        )?;
        // Documents the service left out rank last.
        let mut scores = vec![f64::NEG_INFINITY; texts.len()];
        for hit in resp.results {
            if let Some(s) = scores.get_mut(hit.index) {
                *s = hit.relevance_score;
            }
        }
        Ok(scores)
    }
}
