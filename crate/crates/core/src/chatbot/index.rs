use std::collections::HashMap;
use std::fs;
use std::ops::Range;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ChatError;

pub const DEFAULT_LEAF_SIZE: usize = 512;
pub const DEFAULT_PARENT_SIZE: usize = 2048;
const MANIFEST: &str = "manifest.json";
const NODE_DIR: &str = "nodes";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum NodeLevel {
    Parent,
    Leaf,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexNode {
    pub id: String,
    pub level: NodeLevel,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent_id: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub child_ids: Vec<String>,
    /// Ordinal among nodes of the same level.
    pub position: usize,
    /// Word offset of the node's first word in the document.
    pub start_word: usize,
    pub word_count: usize,
}

impl IndexNode {
    /// Document-order key shared by both levels.
    pub fn order_key(&self) -> (usize, NodeLevel) {
        (self.start_word, self.level)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    version: u32,
    leaf_size: usize,
    parent_size: usize,
    parents: Vec<String>,
    leaves: Vec<String>,
}

/// Two-level chunk hierarchy over one document. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Index {
    pub leaf_size: usize,
    pub parent_size: usize,
    pub parents: Vec<IndexNode>,
    pub leaves: Vec<IndexNode>,
    lookup: HashMap<String, (NodeLevel, usize)>,
}

/// A word plus the whitespace after it. Concatenating units gives back the
/// text they were cut from.
fn word_units(text: &str) -> Vec<&str> {
    let mut units = Vec::new();
    let mut start = 0;
    let mut in_space = false;
    for (i, c) in text.char_indices() {
        if c.is_whitespace() {
            in_space = true;
        } else if in_space {
            units.push(&text[start..i]);
            start = i;
            in_space = false;
        }
    }
    if start < text.len() {
        units.push(&text[start..]);
    }
    units
}

fn ends_sentence(unit: &str) -> bool {
    let word = unit.trim_end();
    let word = word.trim_end_matches(['"', '\'', ')', ']', '\u{201D}', '\u{2019}']);
    word.ends_with(['.', '!', '?', '\u{0964}', '\u{0965}']) || unit.contains("\n\n")
}

/// Packs whole sentences into chunks of at most `max` units. A sentence
/// longer than `max` is cut at word granularity.
fn pack(units: &[&str], max: usize) -> Vec<Range<usize>> {
    let mut chunks = Vec::new();
    let (mut cur_start, mut cur_len) = (0, 0);
    let mut s = 0;
    for (i, u) in units.iter().enumerate() {
        if !(ends_sentence(u) || i + 1 == units.len()) {
            continue;
        }
        let (mut start, mut len) = (s, i + 1 - s);
        s = i + 1;
        if cur_len + len <= max {
            cur_len += len;
            continue;
        }
        if cur_len > 0 {
            chunks.push(cur_start..cur_start + cur_len);
        }
        while len > max {
            chunks.push(start..start + max);
            start += max;
            len -= max;
        }
        cur_start = start;
        cur_len = len;
    }
    if cur_len > 0 {
        chunks.push(cur_start..cur_start + cur_len);
    }
    chunks
}

pub fn build_index(document: &str, leaf_size: usize, parent_size: usize) -> Result<Index, ChatError> {
    if leaf_size == 0 || leaf_size >= parent_size {
        return Err(ChatError::InvalidSizes { leaf_size, parent_size });
    }
    let body = document.trim_start();
    if body.trim().is_empty() {
        return Err(ChatError::EmptyDocument);
    }
    let units = word_units(body);
    let mut parents = Vec::new();
    let mut leaves = Vec::new();
    for (p, prange) in pack(&units, parent_size).into_iter().enumerate() {
        let pid = format!("p{p:04}");
        let punits = &units[prange.clone()];
        let mut child_ids = Vec::new();
        for (l, lrange) in pack(punits, leaf_size).into_iter().enumerate() {
            let lid = format!("{pid}-l{l:02}");
            child_ids.push(lid.clone());
            leaves.push(IndexNode {
                id: lid,
                level: NodeLevel::Leaf,
                text: punits[lrange.clone()].concat(),
                parent_id: Some(pid.clone()),
                child_ids: Vec::new(),
                position: leaves.len(),
                start_word: prange.start + lrange.start,
                word_count: lrange.len(),
            });
        }
        parents.push(IndexNode {
            id: pid,
            level: NodeLevel::Parent,
            text: punits.concat(),
            parent_id: None,
            child_ids,
            position: p,
            start_word: prange.start,
            word_count: prange.len(),
        });
    }
    Ok(Index::from_parts(leaf_size, parent_size, parents, leaves))
}

impl Index {
    fn from_parts(leaf_size: usize, parent_size: usize, parents: Vec<IndexNode>, leaves: Vec<IndexNode>) -> Self {
        let mut lookup = HashMap::with_capacity(parents.len() + leaves.len());
        for (i, n) in parents.iter().enumerate() {
            lookup.insert(n.id.clone(), (NodeLevel::Parent, i));
        }
        for (i, n) in leaves.iter().enumerate() {
            lookup.insert(n.id.clone(), (NodeLevel::Leaf, i));
        }
        Self { leaf_size, parent_size, parents, leaves, lookup }
    }

    pub fn node(&self, id: &str) -> Option<&IndexNode> {
        self.lookup.get(id).map(|&(level, i)| match level {
            NodeLevel::Parent => &self.parents[i],
            NodeLevel::Leaf => &self.leaves[i],
        })
    }

    pub fn parent_of(&self, leaf: &IndexNode) -> Option<&IndexNode> {
        leaf.parent_id.as_deref().and_then(|id| self.node(id))
    }

    /// The document text without its leading whitespace.
    pub fn text(&self) -> String {
        self.parents.iter().map(|p| p.text.as_str()).collect()
    }

    pub fn save(&self, dir: &Path) -> Result<(), ChatError> {
        let nodes = dir.join(NODE_DIR);
        fs::create_dir_all(&nodes)?;
        for n in self.parents.iter().chain(&self.leaves) {
            fs::write(nodes.join(format!("{}.json", n.id)), serde_json::to_string_pretty(n)?)?;
        }
        let manifest = Manifest {
            version: FORMAT_VERSION,
            leaf_size: self.leaf_size,
            parent_size: self.parent_size,
            parents: self.parents.iter().map(|n| n.id.clone()).collect(),
            leaves: self.leaves.iter().map(|n| n.id.clone()).collect(),
        };
        fs::write(dir.join(MANIFEST), serde_json::to_string_pretty(&manifest)?)?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self, ChatError> {
        let manifest: Manifest = serde_json::from_str(&fs::read_to_string(dir.join(MANIFEST))?)?;
        if manifest.version != FORMAT_VERSION {
            return Err(ChatError::Corrupt(format!("unsupported index version {}", manifest.version)));
        }
        let read = |id: &String| -> Result<IndexNode, ChatError> {
            let text = fs::read_to_string(dir.join(NODE_DIR).join(format!("{id}.json")))?;
            Ok(serde_json::from_str(&text)?)
        };
        let parents = manifest.parents.iter().map(read).collect::<Result<Vec<_>, _>>()?;
        let leaves = manifest.leaves.iter().map(read).collect::<Result<Vec<_>, _>>()?;
        let index = Self::from_parts(manifest.leaf_size, manifest.parent_size, parents, leaves);
        for leaf in &index.leaves {
            if index.parent_of(leaf).is_none() {
                return Err(ChatError::Corrupt(format!("leaf {} has no parent", leaf.id)));
            }
        }
        Ok(index)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(n: usize, per_sentence: usize) -> String {
        (0..n)
            .map(|i| if (i + 1) % per_sentence == 0 { format!("w{i}.") } else { format!("w{i}") })
            .collect::<Vec<_>>()
            .join(" ")
    }

    #[test]
    fn five_thousand_words() {
        let doc = words(5000, 10);
        let idx = build_index(&doc, 512, 2048).unwrap();
        assert_eq!(idx.parents.len(), 3);
        assert_eq!(idx.text(), doc);
        for p in &idx.parents {
            assert!(p.word_count <= 2048);
            let joined: String = p.child_ids.iter().map(|c| idx.node(c).unwrap().text.as_str()).collect();
            assert_eq!(joined, p.text);
        }
        assert!(idx.leaves.iter().all(|l| l.word_count <= 512));
    }

    #[test]
    fn small_and_empty() {
        let idx = build_index(&words(100, 7), 512, 2048).unwrap();
        assert_eq!((idx.parents.len(), idx.leaves.len()), (1, 1));
        assert!(matches!(build_index("", 512, 2048), Err(ChatError::EmptyDocument)));
        assert!(matches!(build_index("x", 512, 512), Err(ChatError::InvalidSizes { .. })));
    }

    #[test]
    fn prefers_sentence_boundaries() {
        let doc = "a b c. d e f. g h i j k l m n.";
        let idx = build_index(doc, 4, 8).unwrap();
        let texts: Vec<_> = idx.leaves.iter().map(|l| l.text.as_str()).collect();
        assert_eq!(texts[0], "a b c. ");
        assert_eq!(idx.text(), doc);
    }

    #[test]
    fn persist_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let idx = build_index(&words(1500, 9), 100, 400).unwrap();
        idx.save(dir.path()).unwrap();
        assert_eq!(Index::load(dir.path()).unwrap(), idx);
    }
}
