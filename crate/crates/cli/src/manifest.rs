//! Run manifests: what was run, on which inputs, producing which outputs.

use anyhow::{Context, Result};
use nerperturb_backend::{Client, Fnv1a};
use serde::Serialize;
use serde_json::Value;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug, Serialize)]
pub struct FileDigest {
    pub path: String,
    /// FNV-1a 64 of the file bytes, for change detection (not security).
    pub fnv1a64: String,
    pub bytes: u64,
}

pub fn digest(path: &Path) -> Result<FileDigest> {
    let bytes = std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut h = Fnv1a::new();
    h.write(&bytes);
    Ok(FileDigest {
        path: path.display().to_string(),
        fnv1a64: format!("{:016x}", h.finish()),
        bytes: bytes.len() as u64,
    })
}

#[derive(Debug, Serialize)]
pub struct BackendInfo {
    pub endpoint: String,
    pub models: BTreeMap<String, String>,
}

impl BackendInfo {
    pub fn of(client: &Client) -> Self {
        BackendInfo {
            endpoint: client.endpoint(),
            models: client
                .health()
                .models
                .iter()
                .map(|(cap, model)| (cap.to_string(), model.clone()))
                .collect(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub created: String,
    pub settings: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub backend: Option<BackendInfo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wordnet: Option<String>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

impl Manifest {
    pub fn new(command: &str, settings: Value) -> Self {
        Manifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            created: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            settings,
            backend: None,
            wordnet: None,
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    /// Writes `<primary output>.manifest.json` and returns its path.
    pub fn write_next_to(&self, primary: &Path) -> Result<PathBuf> {
        let mut name = primary.as_os_str().to_owned();
        name.push(".manifest.json");
        let path = PathBuf::from(name);
        let text = serde_json::to_string_pretty(self)? + "\n";
        std::fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
        Ok(path)
    }
}
