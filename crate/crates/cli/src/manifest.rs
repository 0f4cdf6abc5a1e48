//! Run manifests: every command writes its outputs into an isolated
//! directory named by the content hash of the configuration, alongside a
//! manifest listing exactly the files it produced.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub run_id: String,
    pub command: String,
    pub config: toml::Value,
    pub started: String,
    pub finished: String,
    pub outputs: Vec<String>,
    pub versions: String,
    pub seed: u64,
}

/// Content hash of the configuration plus the seed; identical inputs reuse
/// the same run directory.
pub fn run_id(command: &str, config_text: &str, seed: u64) -> String {
    let mut h = Sha256::new();
    h.update(command.as_bytes());
    h.update([0]);
    h.update(config_text.as_bytes());
    h.update(seed.to_le_bytes());
    let digest = h.finalize();
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

pub struct RunDir {
    pub dir: PathBuf,
    pub run_id: String,
    command: String,
    config: toml::Value,
    seed: u64,
    started: chrono::DateTime<chrono::Utc>,
    outputs: Vec<String>,
}

impl RunDir {
    pub fn create(out_dir: &Path, command: &str, config_text: &str, seed: u64) -> std::io::Result<Self> {
        let id = run_id(command, config_text, seed);
        let dir = out_dir.join(format!("{command}-{id}"));
        std::fs::create_dir_all(&dir)?;
        let config: toml::Value = toml::from_str(config_text).unwrap_or(toml::Value::String(config_text.into()));
        Ok(RunDir {
            dir,
            run_id: id,
            command: command.to_string(),
            config,
            seed,
            started: chrono::Utc::now(),
            outputs: Vec::new(),
        })
    }

    pub fn write_text(&mut self, name: &str, content: &str) -> std::io::Result<PathBuf> {
        let path = self.dir.join(name);
        std::fs::write(&path, content)?;
        self.outputs.push(name.to_string());
        Ok(path)
    }

    /// Registers a file written directly into the run directory.
    pub fn note_output(&mut self, name: &str) {
        self.outputs.push(name.to_string());
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> std::io::Result<PathBuf> {
        let text = serde_json::to_string_pretty(value).expect("serializable report");
        self.write_text(name, &text)
    }

    /// Writes manifest.json; every listed output exists by construction.
    pub fn finish(self) -> std::io::Result<PathBuf> {
        let manifest = RunManifest {
            run_id: self.run_id.clone(),
            command: self.command,
            config: self.config,
            started: self.started.to_rfc3339(),
            finished: chrono::Utc::now().to_rfc3339(),
            outputs: self.outputs,
            versions: format!("lognls {}", env!("CARGO_PKG_VERSION")),
            seed: self.seed,
        };
        let path = self.dir.join("manifest.json");
        std::fs::write(&path, serde_json::to_string_pretty(&manifest).unwrap())?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn run_id_is_content_deterministic() {
        let a = run_id("breather", "lambda = 1.0", 42);
        let b = run_id("breather", "lambda = 1.0", 42);
        assert_eq!(a, b);
        assert_ne!(a, run_id("breather", "lambda = 2.0", 42));
        assert_ne!(a, run_id("breather", "lambda = 1.0", 43));
        assert_ne!(a, run_id("gausson", "lambda = 1.0", 42));
    }
}
