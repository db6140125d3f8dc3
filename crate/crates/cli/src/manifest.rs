//! `manifest.json`: what ran, with which resolved flags, when, and what it
//! wrote. The `command` field alone is enough to repeat the run.

use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use swag_core::{AdamConfig, Loss, ModelConfig};

use crate::args::Command;
use crate::error::{CliError, CliResult};
use crate::output::write_file;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Training {
    pub epochs: usize,
    pub batch_size: usize,
    pub loss: Loss,
    pub adam: AdamConfig,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckpointHash {
    pub path: PathBuf,
    /// SHA-256 of `"blob <len>\0" + contents`, as git hashes blobs.
    pub blob_sha256: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: Command,
    pub seed: u64,
    pub configs: Vec<ModelConfig>,
    pub training: Training,
    pub started_at: String,
    pub finished_at: String,
    /// Relative to the manifest's directory.
    pub outputs: Vec<PathBuf>,
    pub checkpoints: Vec<CheckpointHash>,
}

pub fn timestamp() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

pub fn git_blob_sha256(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    hex::encode(h.finalize())
}

impl RunManifest {
    pub fn save(&self, dir: &Path) -> CliResult<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serialises");
        write_file(&dir.join(MANIFEST_FILE), text.as_bytes())
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| swag_core::Error::Io {
            path: path.to_owned(),
            source,
        })?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Input(format!("{}: not a run manifest: {e}", path.display())))
    }
}
