use std::fs;
use std::io::{self, BufRead, Write};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::{CompletionParams, CompletionResult};

/// One prompt/response exchange in the audit ledger.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CallRecord {
    pub sequence: u64,
    /// Prompt kind label, e.g. `kshot-beta-10` or `chat-answer`.
    pub kind: String,
    pub prompt_hash: String,
    pub prompt: String,
    pub params: CompletionParams,
    pub result: Option<CompletionResult>,
    pub error: Option<String>,
    pub timestamp_ms: u64,
    /// Start of every attempt, measured from the recorder's creation.
    #[serde(with = "durations_ms")]
    pub attempt_starts: Vec<Duration>,
}

mod durations_ms {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Duration], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|d| d.as_secs_f64() * 1000.0).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Duration>, D::Error> {
        let ms = Vec::<f64>::deserialize(d)?;
        Ok(ms.into_iter().map(|m| Duration::from_secs_f64(m / 1000.0)).collect())
    }
}

/// Thread-safe call ledger. Sequence numbers are claimed atomically when a
/// call starts, so they reflect start order even when calls finish out of
/// order.
#[derive(Debug)]
pub struct Recorder {
    epoch: Instant,
    next: AtomicU64,
    records: Mutex<Vec<CallRecord>>,
}

impl Default for Recorder {
    fn default() -> Self {
        Self::new()
    }
}

impl Recorder {
    pub fn new() -> Self {
        Self { epoch: Instant::now(), next: AtomicU64::new(1), records: Mutex::new(Vec::new()) }
    }

    pub(crate) fn next_sequence(&self) -> u64 {
        self.next.fetch_add(1, Ordering::SeqCst)
    }

    pub(crate) fn since_epoch(&self, t: Instant) -> Duration {
        t.saturating_duration_since(self.epoch)
    }

    pub(crate) fn push(&self, record: CallRecord) {
        self.records.lock().expect("recorder poisoned").push(record);
    }

    /// All records so far, ordered by sequence number.
    pub fn records(&self) -> Vec<CallRecord> {
        let mut v = self.records.lock().expect("recorder poisoned").clone();
        v.sort_by_key(|r| r.sequence);
        v
    }

    pub fn len(&self) -> usize {
        self.records.lock().expect("recorder poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn write_jsonl(&self, path: impl AsRef<Path>) -> io::Result<()> {
        write_records(path, &self.records())
    }
}

pub(crate) fn unix_millis() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0)
}

pub fn write_records(path: impl AsRef<Path>, records: &[CallRecord]) -> io::Result<()> {
    let mut out = io::BufWriter::new(fs::File::create(path)?);
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn read_records(path: impl AsRef<Path>) -> io::Result<Vec<CallRecord>> {
    let file = io::BufReader::new(fs::File::open(path)?);
    let mut v = Vec::new();
    for line in file.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        v.push(serde_json::from_str(&line).map_err(io::Error::other)?);
    }
    Ok(v)
}
