use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Provenance record written next to (and embedded in) every output.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub model_file: String,
    pub model_sha256: String,
    pub parameters: serde_json::Value,
    pub version: String,
    pub seed: Option<u64>,
    pub outputs: Vec<String>,
    /// `pass`, `fail` or `two_sided_report` for verification runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcome: Option<String>,
}

impl RunManifest {
    pub fn new(command: &str, model_file: &Path, model_bytes: &[u8], parameters: serde_json::Value) -> Self {
        Self {
            command: command.to_string(),
            model_file: model_file.display().to_string(),
            model_sha256: hex::encode(Sha256::digest(model_bytes)),
            parameters,
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: None,
            outputs: Vec::new(),
            outcome: None,
        }
    }
}

pub fn manifest_path(out: &Path) -> std::path::PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    name.into()
}
