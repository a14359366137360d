//! Run manifest: what was run, with which resolved settings, on which inputs.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub role: String,
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: u64,
    pub config: serde_json::Value,
    pub inputs: Vec<InputDigest>,
    pub outputs: Vec<PathBuf>,
}

pub fn digest(role: &str, path: &Path, bytes: &[u8]) -> InputDigest {
    InputDigest {
        role: role.to_string(),
        path: path.to_path_buf(),
        sha256: hex::encode(Sha256::digest(bytes)),
    }
}

/// `<out>.manifest.json` next to the primary output.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}
