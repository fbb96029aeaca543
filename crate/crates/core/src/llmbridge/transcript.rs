// SPDX-License-Identifier: Apache-2.0

//! Append-only request/response transcripts keyed by prompt hash.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::LlmError;

/// Lowercase hex SHA-256 of the rendered prompt.
pub fn prompt_hash(rendered: &str) -> String {
    hex::encode(Sha256::digest(rendered.as_bytes()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptRecord {
    pub prompt_hash: String,
    pub rendered_prompt: String,
    pub raw_response: String,
    pub timestamp: DateTime<Utc>,
}

impl TranscriptRecord {
    pub fn new(rendered_prompt: &str, raw_response: &str) -> TranscriptRecord {
        TranscriptRecord {
            prompt_hash: prompt_hash(rendered_prompt),
            rendered_prompt: rendered_prompt.to_string(),
            raw_response: raw_response.to_string(),
            timestamp: Utc::now(),
        }
    }
}

/// Recorded responses plus an optional serialized append sink. When a hash
/// was recorded more than once the first record wins.
#[derive(Debug, Default)]
pub struct Transcript {
    records: Mutex<HashMap<String, TranscriptRecord>>,
    sink: Option<(PathBuf, Mutex<File>)>,
}

impl Transcript {
    pub fn in_memory() -> Transcript {
        Transcript::default()
    }

    /// Read every record from `path`. A missing file is an empty transcript.
    pub fn load(path: &Path) -> Result<Transcript, LlmError> {
        let mut t = Transcript::default();
        if !path.exists() {
            return Ok(t);
        }
        let io = |e: std::io::Error| LlmError::Transcript(format!("{}: {e}", path.display()));
        let reader = BufReader::new(File::open(path).map_err(io)?);
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(io)?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: TranscriptRecord = serde_json::from_str(&line)
                .map_err(|e| LlmError::Transcript(format!("{} line {}: {e}", path.display(), i + 1)))?;
            t.records.get_mut().unwrap_or_else(|e| e.into_inner()).entry(rec.prompt_hash.clone()).or_insert(rec);
        }
        Ok(t)
    }

    /// Load `path` and append new records to it.
    pub fn open(path: &Path) -> Result<Transcript, LlmError> {
        let mut t = Transcript::load(path)?;
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| LlmError::Transcript(format!("{}: {e}", path.display())))?;
        t.sink = Some((path.to_path_buf(), Mutex::new(file)));
        Ok(t)
    }

    pub fn path(&self) -> Option<&Path> {
        self.sink.as_ref().map(|(p, _)| p.as_path())
    }

    fn records(&self) -> std::sync::MutexGuard<'_, HashMap<String, TranscriptRecord>> {
        self.records.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub fn len(&self) -> usize {
        self.records().len()
    }

    pub fn is_empty(&self) -> bool {
        self.records().is_empty()
    }

    pub fn lookup(&self, hash: &str) -> Option<TranscriptRecord> {
        self.records().get(hash).cloned()
    }

    /// Remember `record` and write it to the sink, if any. Lines are written
    /// whole under the sink lock.
    pub fn append(&self, record: &TranscriptRecord) -> Result<(), LlmError> {
        self.records().entry(record.prompt_hash.clone()).or_insert_with(|| record.clone());
        let Some((path, file)) = &self.sink else { return Ok(()) };
        let mut line = serde_json::to_string(record).map_err(|e| LlmError::Transcript(e.to_string()))?;
        line.push('\n');
        let mut f = file.lock().unwrap_or_else(|e| e.into_inner());
        f.write_all(line.as_bytes())
            .and_then(|_| f.flush())
            .map_err(|e| LlmError::Transcript(format!("{}: {e}", path.display())))
    }
}
