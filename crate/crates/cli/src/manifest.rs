//! Run manifests: the machine-readable record of one experiment. Written
//! atomically (temp file + rename) after all outputs, always parseable, and
//! deterministic except for the two timestamp fields.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckResult {
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub artifact_version: String,
    pub kind: String,
    pub seed: u64,
    /// Canonical resolved configuration (the hashed content).
    pub config: BTreeMap<String, String>,
    pub config_hash: String,
    pub started_unix_ms: u64,
    pub finished_unix_ms: u64,
    /// Output file names inside the run directory, sorted.
    pub outputs: Vec<String>,
    pub checks: BTreeMap<String, CheckResult>,
    /// Kind-specific scalar results, formatted with 17 significant digits.
    pub summary: BTreeMap<String, String>,
    /// "pass" when every check passed, "fail" otherwise.
    pub status: String,
}

impl RunManifest {
    pub fn all_passed(&self) -> bool {
        self.status == "pass"
    }

    /// Serializes and writes the manifest into `dir` via temp-file + rename.
    pub fn write_into(&self, dir: &Path) -> anyhow::Result<()> {
        let body = serde_json::to_string_pretty(self)?;
        let tmp = dir.join(format!(".{MANIFEST_FILE}.tmp"));
        std::fs::write(&tmp, body.as_bytes())?;
        std::fs::rename(&tmp, dir.join(MANIFEST_FILE))?;
        Ok(())
    }

    pub fn load(dir: &Path) -> anyhow::Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path)
            .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", path.display()))?;
        Ok(serde_json::from_str(&text)?)
    }
}

pub fn now_unix_ms() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}
