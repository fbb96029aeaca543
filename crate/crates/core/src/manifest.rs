// SPDX-License-Identifier: Apache-2.0

//! Run manifests written next to every output artifact.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, Read};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

pub const TOOL_NAME: &str = "lingpat";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

pub fn file_digest(path: impl AsRef<Path>) -> io::Result<FileDigest> {
    let path = path.as_ref();
    let mut file = File::open(path)?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    let mut bytes = 0u64;
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
        bytes += n as u64;
    }
    Ok(FileDigest {
        path: path.display().to_string(),
        sha256: hex::encode(hasher.finalize()),
        bytes,
    })
}

/// `<output>.manifest.json`
pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    output.with_file_name(name)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Full argument vector, program name excluded.
    pub args: Vec<String>,
    /// Resolved configuration after flag and file precedence.
    pub config: RunConfig,
    pub config_hash: String,
    pub seed: u64,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    /// Versions and hashes of the lexicon, pattern set and similar.
    pub versions: BTreeMap<String, String>,
    pub created_at: String,
    pub runtime_ms: u64,
}

impl Manifest {
    pub fn new(command: impl Into<String>, args: Vec<String>, config: &RunConfig) -> Manifest {
        Manifest {
            tool: TOOL_NAME.into(),
            version: TOOL_VERSION.into(),
            command: command.into(),
            args,
            config: config.clone(),
            config_hash: config.hash(),
            seed: config.seed(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            versions: BTreeMap::new(),
            created_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            runtime_ms: 0,
        }
    }

    pub fn input(&mut self, path: impl AsRef<Path>) -> io::Result<()> {
        let d = file_digest(path)?;
        if !self.inputs.contains(&d) {
            self.inputs.push(d);
        }
        Ok(())
    }

    pub fn output(&mut self, path: impl AsRef<Path>) -> io::Result<()> {
        self.outputs.push(file_digest(path)?);
        Ok(())
    }

    pub fn version(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.versions.insert(key.into(), value.into());
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes") + "\n"
    }

    /// Write next to the first output.
    pub fn write(&self) -> io::Result<PathBuf> {
        let first = self
            .outputs
            .first()
            .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "manifest has no outputs"))?;
        let path = manifest_path(Path::new(&first.path));
        std::fs::write(&path, self.to_json())?;
        Ok(path)
    }

    pub fn load(path: impl AsRef<Path>) -> io::Result<Manifest> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
    }
}
