use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::index::{Index, IndexNode, NodeLevel};
use super::ChatError;
use crate::metrics::{is_punctuation, tokenize};

pub const DEFAULT_TOP: usize = 12;
pub const DEFAULT_KEEP: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Stage {
    Raw,
    Merged,
    Reranked,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredNode {
    pub node: IndexNode,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalResult {
    pub stage: Stage,
    pub nodes: Vec<ScoredNode>,
}

impl RetrievalResult {
    pub fn ids(&self) -> Vec<String> {
        self.nodes.iter().map(|n| n.node.id.clone()).collect()
    }
}

/// Lowercased content terms; punctuation tokens are dropped.
pub fn terms(text: &str) -> Vec<String> {
    tokenize(text)
        .tokens
        .into_iter()
        .filter(|t| !t.chars().all(is_punctuation))
        .collect()
}

/// Scores every leaf of an index against a query, in leaf order.
pub trait LeafScorer: Send + Sync {
    fn id(&self) -> &str;
    fn score_leaves(&self, index: &Index, query: &str) -> Result<Vec<f64>, ChatError>;
}

/// Scores already-retrieved node texts against a query.
pub trait Reranker: Send + Sync {
    fn id(&self) -> &str;
    fn score_texts(&self, query: &str, texts: &[&str]) -> Result<Vec<f64>, ChatError>;
}

/// Okapi BM25 over leaf texts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bm25Scorer {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Scorer {
    fn default() -> Self {
        Self { k1: 1.2, b: 0.75 }
    }
}

impl LeafScorer for Bm25Scorer {
    fn id(&self) -> &str {
        "bm25"
    }

    fn score_leaves(&self, index: &Index, query: &str) -> Result<Vec<f64>, ChatError> {
        let query_terms: BTreeSet<String> = terms(query).into_iter().collect();
        let docs: Vec<HashMap<String, usize>> = index
            .leaves
            .iter()
            .map(|leaf| {
                let mut tf = HashMap::new();
                for t in terms(&leaf.text) {
                    *tf.entry(t).or_insert(0) += 1;
                }
                tf
            })
            .collect();
        let lens: Vec<f64> = docs.iter().map(|d| d.values().sum::<usize>() as f64).collect();
        let n = docs.len() as f64;
        let avg = (lens.iter().sum::<f64>() / n.max(1.0)).max(1.0);
        let idf: Vec<(&String, f64)> = query_terms
            .iter()
            .map(|t| {
                let df = docs.iter().filter(|d| d.contains_key(t)).count() as f64;
                (t, (1.0 + (n - df + 0.5) / (df + 0.5)).ln())
            })
            .collect();
        Ok(docs
            .iter()
            .zip(&lens)
            .map(|(d, &len)| {
                idf.iter()
                    .map(|(t, w)| {
                        let tf = *d.get(*t).unwrap_or(&0) as f64;
                        w * tf * (self.k1 + 1.0) / (tf + self.k1 * (1.0 - self.b + self.b * len / avg))
                    })
                    .sum()
            })
            .collect())
    }
}

/// Fraction of distinct query terms present in the text.
#[derive(Debug, Clone, Copy, Default)]
pub struct OverlapReranker;

impl Reranker for OverlapReranker {
    fn id(&self) -> &str {
        "term-overlap"
    }

    fn score_texts(&self, query: &str, texts: &[&str]) -> Result<Vec<f64>, ChatError> {
        let q: BTreeSet<String> = terms(query).into_iter().collect();
        Ok(texts
            .iter()
            .map(|t| {
                if q.is_empty() {
                    return 0.0;
                }
                let words: BTreeSet<String> = terms(t).into_iter().collect();
                q.intersection(&words).count() as f64 / q.len() as f64
            })
            .collect())
    }
}

fn sort_nodes(nodes: &mut [ScoredNode]) {
    nodes.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.node.order_key().cmp(&b.node.order_key()))
    });
}

/// Top `top` leaves by score, ties in document order. `strict` drops leaves
/// scoring zero or less.
pub fn retrieve(
    index: &Index,
    scorer: &dyn LeafScorer,
    query_en: &str,
    top: usize,
    strict: bool,
) -> Result<RetrievalResult, ChatError> {
    if query_en.trim().is_empty() {
        return Err(ChatError::EmptyQuery);
    }
    let scores = scorer.score_leaves(index, query_en)?;
    if scores.len() != index.leaves.len() {
        return Err(ChatError::Remote(format!(
            "scorer {} returned {} scores for {} leaves",
            scorer.id(),
            scores.len(),
            index.leaves.len()
        )));
    }
    let mut nodes: Vec<ScoredNode> = index
        .leaves
        .iter()
        .zip(scores)
        .filter(|(_, s)| !strict || *s > 0.0)
        .map(|(leaf, score)| ScoredNode { node: leaf.clone(), score })
        .collect();
    sort_nodes(&mut nodes);
    nodes.truncate(top);
    Ok(RetrievalResult { stage: Stage::Raw, nodes })
}

fn expect_stage(result: &RetrievalResult, stage: Stage) -> Result<(), ChatError> {
    if result.stage == stage {
        Ok(())
    } else {
        Err(ChatError::StageMismatch { expected: stage, got: result.stage })
    }
}

/// Replaces a parent's retrieved leaves with the parent when strictly more
/// than half of its children were retrieved. The parent takes the best child
/// score.
pub fn auto_merge(result: RetrievalResult, index: &Index) -> Result<RetrievalResult, ChatError> {
    expect_stage(&result, Stage::Raw)?;
    let mut hits: HashMap<&str, (usize, f64)> = HashMap::new();
    for n in &result.nodes {
        if let Some(pid) = n.node.parent_id.as_deref() {
            let e = hits.entry(pid).or_insert((0, f64::NEG_INFINITY));
            e.0 += 1;
            e.1 = e.1.max(n.score);
        }
    }
    let merged: HashMap<&str, f64> = hits
        .into_iter()
        .filter_map(|(pid, (count, best))| {
            let parent = index.node(pid)?;
            (2 * count > parent.child_ids.len()).then_some((pid, best))
        })
        .collect();

    let mut nodes: Vec<ScoredNode> = Vec::with_capacity(result.nodes.len());
    for n in &result.nodes {
        match n.node.parent_id.as_deref() {
            Some(pid) if merged.contains_key(pid) => {}
            _ => nodes.push(n.clone()),
        }
    }
    for (pid, score) in &merged {
        let parent = index.node(pid).ok_or_else(|| ChatError::UnknownNode(pid.to_string()))?;
        nodes.push(ScoredNode { node: parent.clone(), score: *score });
    }
    sort_nodes(&mut nodes);
    Ok(RetrievalResult { stage: Stage::Merged, nodes })
}

/// Re-scores merged nodes and keeps the best `keep`.
pub fn rerank(
    result: RetrievalResult,
    reranker: &dyn Reranker,
    query_en: &str,
    keep: usize,
) -> Result<RetrievalResult, ChatError> {
    expect_stage(&result, Stage::Merged)?;
    let texts: Vec<&str> = result.nodes.iter().map(|n| n.node.text.as_str()).collect();
    let scores = reranker.score_texts(query_en, &texts)?;
    if scores.len() != texts.len() {
        return Err(ChatError::Remote(format!(
            "reranker {} returned {} scores for {} nodes",
            reranker.id(),
            scores.len(),
            texts.len()
        )));
    }
    let mut nodes: Vec<ScoredNode> = result
        .nodes
        .into_iter()
        .zip(scores)
        .map(|(n, score)| ScoredNode { node: n.node, score })
        .collect();
    sort_nodes(&mut nodes);
    nodes.truncate(keep);
    Ok(RetrievalResult { stage: Stage::Reranked, nodes })
}

/// True when no node in `nodes` has its parent in `nodes` too.
pub fn no_parent_with_child(nodes: &[ScoredNode]) -> bool {
    let parents: BTreeSet<&str> = nodes
        .iter()
        .filter(|n| n.node.level == NodeLevel::Parent)
        .map(|n| n.node.id.as_str())
        .collect();
    nodes
        .iter()
        .all(|n| n.node.parent_id.as_deref().is_none_or(|p| !parents.contains(p)))
}
