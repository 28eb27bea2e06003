//! Parallel datasets, example/test splitting, output cleaning and text
//! diagnostics.

mod clean;
mod pair;
mod script;
mod social;

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use clean::{clean_output, CleanConfig, DEFAULT_LABELS};
pub use pair::{Direction, LanguagePair, Script, UnknownPair};
pub use script::{script_profile, ScriptProfile};
pub use social::normalize_social;

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("cannot read dataset {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: expected 2 tab-separated fields, found {found}")]
    FieldCount { line: usize, found: usize },
    #[error("line {line}: empty `{field}` field")]
    EmptyField { line: usize, field: &'static str },
    #[error("line {line}: invalid JSON: {message}")]
    Json { line: usize, message: String },
    #[error("line {line}: duplicate example id `{id}`")]
    DuplicateId { line: usize, id: String },
    #[error("not enough examples: need {required} (pool + test), have {available}")]
    Insufficient { required: usize, available: usize },
}

/// An English sentence with its gold code-mixed translation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParallelExample {
    pub id: String,
    pub pair: LanguagePair,
    pub english: String,
    pub code_mixed: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dataset {
    pub pair: LanguagePair,
    pub examples: Vec<ParallelExample>,
}

impl Dataset {
    pub fn new(pair: LanguagePair) -> Self {
        Self { pair, examples: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    /// Gold sentences of a non-Latin pair that contain native-script letters.
    /// These are reported, never rejected.
    pub fn non_roman_gold(&self) -> Vec<&ParallelExample> {
        if self.pair.is_latin() {
            return Vec::new();
        }
        self.examples
            .iter()
            .filter(|ex| {
                let profile = script_profile(&ex.code_mixed);
                profile.letters() > 0 && profile.latin_ratio < 1.0
            })
            .collect()
    }
}

#[derive(Deserialize)]
struct JsonLine {
    english: String,
    code_mixed: String,
    #[serde(default)]
    id: Option<String>,
}

/// Loads a TSV (`english<TAB>code_mixed`) or JSON-lines file. The format is
/// chosen by extension: `.jsonl`/`.json` are JSON-lines, anything else TSV.
pub fn load_parallel(path: impl AsRef<Path>, pair: LanguagePair) -> Result<Dataset, CorpusError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let jsonl = matches!(
        path.extension().and_then(|e| e.to_str()),
        Some("jsonl") | Some("json") | Some("ndjson")
    );
    let dataset = if jsonl { parse_jsonl(&text, pair)? } else { parse_tsv(&text, pair)? };
    let bad = dataset.non_roman_gold().len();
    if bad > 0 {
        log::warn!("{}: {bad} gold sentence(s) contain non-Roman letters", path.display());
    }
    Ok(dataset)
}

fn line_id(index: usize) -> String {
    format!("{index:04}")
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
        .filter(|(_, l)| !l.trim().is_empty())
}

pub fn parse_tsv(text: &str, pair: LanguagePair) -> Result<Dataset, CorpusError> {
    let mut ds = Dataset::new(pair);
    for (line, raw) in content_lines(text) {
        let fields: Vec<&str> = raw.split('\t').collect();
        if fields.len() != 2 {
            return Err(CorpusError::FieldCount { line, found: fields.len() });
        }
        let english = non_empty(fields[0], line, "english")?;
        let code_mixed = non_empty(fields[1], line, "code_mixed")?;
        ds.examples.push(ParallelExample {
            id: line_id(ds.examples.len()),
            pair,
            english,
            code_mixed,
        });
    }
    Ok(ds)
}

pub fn parse_jsonl(text: &str, pair: LanguagePair) -> Result<Dataset, CorpusError> {
    let mut ds = Dataset::new(pair);
    let mut seen = HashSet::new();
    for (line, raw) in content_lines(text) {
        let row: JsonLine = serde_json::from_str(raw)
            .map_err(|e| CorpusError::Json { line, message: e.to_string() })?;
        let english = non_empty(&row.english, line, "english")?;
        let code_mixed = non_empty(&row.code_mixed, line, "code_mixed")?;
        let id = row.id.unwrap_or_else(|| line_id(ds.examples.len()));
        if !seen.insert(id.clone()) {
            return Err(CorpusError::DuplicateId { line, id });
        }
        ds.examples.push(ParallelExample { id, pair, english, code_mixed });
    }
    Ok(ds)
}

fn non_empty(field: &str, line: usize, name: &'static str) -> Result<String, CorpusError> {
    let trimmed = field.trim();
    if trimmed.is_empty() {
        Err(CorpusError::EmptyField { line, field: name })
    } else {
        Ok(trimmed.to_string())
    }
}

/// Draws a shot pool and a disjoint test set with a seeded shuffle. The pool
/// is drawn first; both subsets keep file order.
pub fn split_examples(
    dataset: &Dataset,
    n_pool: usize,
    n_test: usize,
    seed: u64,
) -> Result<(Dataset, Dataset), CorpusError> {
    let required = n_pool + n_test;
    if required > dataset.len() {
        return Err(CorpusError::Insufficient { required, available: dataset.len() });
    }
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let take = |idx: &mut [usize]| {
        idx.sort_unstable();
        Dataset {
            pair: dataset.pair,
            examples: idx.iter().map(|&i| dataset.examples[i].clone()).collect(),
        }
    };
    let (pool_idx, rest) = order.split_at_mut(n_pool);
    let pool = take(pool_idx);
    let test = take(&mut rest[..n_test]);
    Ok((pool, test))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn synthetic(n: usize) -> Dataset {
        Dataset {
            pair: LanguagePair::EnHi,
            examples: (0..n)
                .map(|i| ParallelExample {
                    id: line_id(i),
                    pair: LanguagePair::EnHi,
                    english: format!("sentence {i}"),
                    code_mixed: format!("vakya {i}"),
                })
                .collect(),
        }
    }

    #[test]
    fn tsv_table_row() {
        let ds = parse_tsv(
            "They put it back into the market.\tUnhone ise market mein vapas daal diya.\n",
            LanguagePair::EnHi,
        )
        .unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(ds.examples[0].english, "They put it back into the market.");
        assert_eq!(ds.examples[0].code_mixed, "Unhone ise market mein vapas daal diya.");
        assert_eq!(ds.examples[0].id, "0000");
    }

    #[test]
    fn empty_file_is_empty_dataset() {
        assert!(parse_tsv("", LanguagePair::EnBn).unwrap().is_empty());
        assert!(parse_jsonl("", LanguagePair::EnBn).unwrap().is_empty());
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let err = parse_tsv("a\tb\nonly english sentence\n", LanguagePair::EnHi).unwrap_err();
        assert!(matches!(err, CorpusError::FieldCount { line: 2, found: 1 }), "{err}");
        let err = parse_tsv("a\t  \n", LanguagePair::EnHi).unwrap_err();
        assert!(matches!(err, CorpusError::EmptyField { line: 1, field: "code_mixed" }));
    }

    #[test]
    fn jsonl_with_and_without_ids() {
        let text = "{\"english\":\"Hi\",\"code_mixed\":\"Namaste\",\"id\":\"x1\"}\n{\"english\":\"Bye\",\"code_mixed\":\"Alvida\"}\n";
        let ds = parse_jsonl(text, LanguagePair::EnHi).unwrap();
        assert_eq!(ds.examples[0].id, "x1");
        assert_eq!(ds.examples[1].id, "0001");
        let err = parse_jsonl("{\"english\":\"\",\"code_mixed\":\"x\"}", LanguagePair::EnHi)
            .unwrap_err();
        assert!(matches!(err, CorpusError::EmptyField { line: 1, field: "english" }));
    }

    #[test]
    fn load_selects_format_by_extension() {
        let dir = tempfile::tempdir().unwrap();
        let tsv = dir.path().join("d.tsv");
        fs::write(&tsv, "a\tb\n").unwrap();
        assert_eq!(load_parallel(&tsv, LanguagePair::EnFr).unwrap().len(), 1);
        let jl = dir.path().join("d.jsonl");
        fs::write(&jl, "{\"english\":\"a\",\"code_mixed\":\"b\"}\n").unwrap();
        assert_eq!(load_parallel(&jl, LanguagePair::EnFr).unwrap().len(), 1);
        assert!(matches!(
            load_parallel(dir.path().join("missing.tsv"), LanguagePair::EnFr),
            Err(CorpusError::Io { .. })
        ));
    }

    #[test]
    fn split_sizes_and_errors() {
        let ds = synthetic(120);
        let (pool, test) = split_examples(&ds, 20, 100, 7).unwrap();
        assert_eq!((pool.len(), test.len()), (20, 100));
        let (p0, t0) = split_examples(&ds, 0, 0, 7).unwrap();
        assert!(p0.is_empty() && t0.is_empty());
        let err = split_examples(&synthetic(9), 5, 5, 1).unwrap_err();
        assert_eq!(err.to_string(), "not enough examples: need 10 (pool + test), have 9");
    }

    #[test]
    fn split_is_deterministic() {
        let ds = synthetic(50);
        assert_eq!(split_examples(&ds, 10, 20, 3).unwrap(), split_examples(&ds, 10, 20, 3).unwrap());
        assert_ne!(split_examples(&ds, 10, 20, 3).unwrap(), split_examples(&ds, 10, 20, 4).unwrap());
    }

    #[test]
    fn non_roman_gold_is_reported() {
        let mut ds = synthetic(2);
        ds.examples[1].code_mixed = "यह market है".into();
        assert_eq!(ds.non_roman_gold().len(), 1);
    }

    proptest! {
        #[test]
        fn split_disjoint_subset(n in 0usize..60, pool in 0usize..30, test in 0usize..30, seed: u64) {
            let ds = synthetic(n);
            match split_examples(&ds, pool, test, seed) {
                Ok((p, t)) => {
                    let pids: HashSet<_> = p.examples.iter().map(|e| e.id.clone()).collect();
                    let tids: HashSet<_> = t.examples.iter().map(|e| e.id.clone()).collect();
                    prop_assert!(pids.is_disjoint(&tids));
                    prop_assert_eq!(pids.len(), pool);
                    prop_assert_eq!(tids.len(), test);
                    for ex in p.examples.iter().chain(&t.examples) {
                        prop_assert!(ds.examples.contains(ex));
                    }
                }
                Err(_) => prop_assert!(pool + test > n),
            }
        }
    }
}
