use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::builtin;
use crate::model::{parse_model, Realization};
use crate::{Error, Result};

/// Where the model came from, with its text for hashing.
#[derive(Clone, Debug)]
pub struct ModelSource {
    pub label: String,
    pub text: String,
}

impl ModelSource {
    /// A builtin name or a path to a JSON model file.
    pub fn resolve(spec: &str) -> Result<Self> {
        let text = match spec {
            "pyragas" => builtin::PYRAGAS_JSON.to_string(),
            "leukemia" => builtin::LEUKEMIA_JSON.to_string(),
            path => std::fs::read_to_string(path).map_err(|e| Error::Validation(format!("cannot read model `{path}`: {e}")))?,
        };
        Ok(Self { label: spec.to_string(), text })
    }

    pub fn realization(&self) -> Result<Realization> {
        parse_model(&self.text)
    }

    pub fn sha256(&self) -> String {
        hex(&Sha256::digest(self.text.as_bytes()))
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct OutputRecord {
    pub file: String,
    pub sha256: String,
}

/// Everything that determines a run's numeric output, plus bookkeeping.
/// The digest covers `command`, `model`, `model_sha256`, `params`,
/// `config` and `version`; output directory, thread count and timestamp
/// are excluded.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub model: String,
    pub model_sha256: String,
    pub params: BTreeMap<String, f64>,
    pub config: serde_json::Value,
    pub version: String,
    pub digest: String,
    pub out_dir: String,
    pub threads: Option<usize>,
    pub timestamp_unix: u64,
    pub outputs: Vec<OutputRecord>,
}

impl RunManifest {
    pub fn new(
        command: &str,
        source: &ModelSource,
        params: &[(String, f64)],
        config: serde_json::Value,
        out_dir: &Path,
        threads: Option<usize>,
    ) -> Self {
        let params: BTreeMap<String, f64> = params.iter().cloned().collect();
        let version = env!("CARGO_PKG_VERSION").to_string();
        let identity = serde_json::json!({
            "command": command,
            "model": source.label,
            "model_sha256": source.sha256(),
            "params": params,
            "config": config,
            "version": version,
        });
        let digest = hex(&Sha256::digest(identity.to_string().as_bytes()));
        let timestamp_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Self {
            command: command.to_string(),
            model: source.label.clone(),
            model_sha256: source.sha256(),
            params,
            config,
            version,
            digest,
            out_dir: out_dir.display().to_string(),
            threads,
            timestamp_unix,
            outputs: Vec::new(),
        }
    }

    /// Write an output file and record its hash.
    pub fn write(&mut self, dir: &Path, name: &str, contents: &[u8]) -> Result<PathBuf> {
        let path = dir.join(name);
        std::fs::write(&path, contents)?;
        self.outputs.push(OutputRecord { file: name.to_string(), sha256: hex(&Sha256::digest(contents)) });
        Ok(path)
    }

    /// Write `manifest.json` itself.
    pub fn finish(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Validation(e.to_string()))?;
        std::fs::write(&path, text + "\n")?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_ignores_bookkeeping() {
        let src = ModelSource::resolve("leukemia").unwrap();
        let cfg = serde_json::json!({"fix": ["tau", 4.9]});
        let a = RunManifest::new("hopf", &src, &[], cfg.clone(), Path::new("/tmp/a"), Some(1));
        let b = RunManifest::new("hopf", &src, &[], cfg, Path::new("/tmp/b"), Some(4));
        assert_eq!(a.digest, b.digest);
        let c = RunManifest::new("hopf", &src, &[("k".into(), 1.01)], serde_json::json!({}), Path::new("/tmp/a"), None);
        assert_ne!(a.digest, c.digest);
    }
}
