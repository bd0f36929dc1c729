//! Run manifests: enough provenance to reproduce any output byte for byte.

use std::collections::BTreeMap;

use serde::Serialize;
use sha2::{Digest, Sha256};

use locex::config::PremetricConfig;
use locex::generators::GeneratorSpec;

use crate::Result;

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub artifact_version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schema_hash: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub premetric: Option<PremetricConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub parameters: BTreeMap<String, serde_json::Value>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        RunManifest {
            command: command.to_string(),
            artifact_version: ARTIFACT_VERSION.to_string(),
            schema_hash: None,
            premetric: None,
            generator: None,
            seed: None,
            parameters: BTreeMap::new(),
        }
    }

    pub fn parameter(&mut self, key: &str, value: impl Serialize) -> Result<()> {
        self.parameters.insert(key.to_string(), serde_json::to_value(value)?);
        Ok(())
    }
}

/// Hex SHA-256 of a configuration text.
pub fn text_hash(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

/// Wrap a manifest and a result into the final JSON document: UTF-8,
/// keys sorted, trailing newline.
pub fn render_report(manifest: &RunManifest, result: impl Serialize) -> Result<String> {
    #[derive(Serialize)]
    struct Report<'a, T: Serialize> {
        manifest: &'a RunManifest,
        result: T,
    }
    // Converting through Value sorts object keys.
    let value = serde_json::to_value(Report { manifest, result })?;
    let mut text = serde_json::to_string_pretty(&value)?;
    text.push('\n');
    Ok(text)
}
