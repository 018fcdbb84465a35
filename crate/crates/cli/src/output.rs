//! Artifact writing: CSV/JSON files plus a manifest with SHA-256 digests.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

pub struct OutputDir {
    root: PathBuf,
    artifacts: Vec<(String, String)>,
}

impl OutputDir {
    pub fn new(root: &Path) -> std::io::Result<Self> {
        std::fs::create_dir_all(root)?;
        Ok(OutputDir { root: root.to_path_buf(), artifacts: Vec::new() })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> std::io::Result<()> {
        let path = self.root.join(name);
        std::fs::write(&path, contents)?;
        let digest = Sha256::digest(contents.as_bytes());
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        self.artifacts.push((name.to_string(), hex));
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> std::io::Result<()> {
        let mut text = serde_json::to_string_pretty(value).expect("serializable");
        text.push('\n');
        self.write(name, &text)
    }

    /// manifest.json listing every artifact with its digest.
    pub fn finish(mut self) -> std::io::Result<()> {
        self.artifacts.sort();
        let entries: Vec<serde_json::Value> = self
            .artifacts
            .iter()
            .map(|(name, sha256)| serde_json::json!({"name": name, "sha256": sha256}))
            .collect();
        let manifest = serde_json::json!({ "artifacts": entries });
        let mut text = serde_json::to_string_pretty(&manifest).expect("serializable");
        text.push('\n');
        std::fs::write(self.root.join("manifest.json"), text)
    }
}

/// 17 significant digits, stable across runs.
pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}
