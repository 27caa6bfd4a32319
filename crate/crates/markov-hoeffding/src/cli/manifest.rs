//! Run manifests: every output file opens with a single `#`-prefixed JSON
//! line carrying the command, resolved inputs, seed, artifact paths, tool
//! version, and a hash over all of it, so outputs are attributable to the
//! exact invocation that produced them.

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub inputs: serde_json::Value,
    pub seed: u64,
    pub artifacts: Vec<String>,
    pub version: String,
}

impl RunManifest {
    pub fn new(command: &str, inputs: serde_json::Value, seed: u64, artifacts: Vec<String>) -> Self {
        Self {
            command: command.to_string(),
            inputs,
            seed,
            artifacts,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    /// SHA-256 over the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let encoded = serde_json::to_string(self).expect("manifest serializes");
        let mut hasher = Sha256::new();
        hasher.update(encoded.as_bytes());
        hex_string(&hasher.finalize())
    }

    /// The `# {...}` first line of every emitted file.
    pub fn header_line(&self) -> String {
        let mut value = serde_json::to_value(self).expect("manifest serializes");
        value["manifest_hash"] = serde_json::Value::String(self.hash());
        format!("# {value}")
    }

    /// Manifest hash injected into a JSON object for stdout reports.
    pub fn stamp(&self, mut value: serde_json::Value) -> serde_json::Value {
        value["manifest_hash"] = serde_json::Value::String(self.hash());
        value
    }
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
