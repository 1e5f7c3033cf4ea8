//! File emission and the run manifest: every output is recorded with a
//! content hash so reruns can be diffed byte for byte.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Default, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub preset: Option<String>,
    pub scenarios: Vec<serde_json::Value>,
    pub solver: Option<serde_json::Value>,
    /// No randomness anywhere: identical inputs give identical bytes.
    pub deterministic: bool,
    pub outputs: Vec<OutputRecord>,
}

#[derive(Debug, Serialize)]
pub struct OutputRecord {
    pub path: String,
    pub sha256: String,
}

pub struct OutDir {
    root: PathBuf,
    pub manifest: RunManifest,
}

impl OutDir {
    pub fn new(root: &Path, command: &str) -> Result<Self> {
        fs::create_dir_all(root)
            .with_context(|| format!("creating output directory {}", root.display()))?;
        Ok(Self {
            root: root.to_path_buf(),
            manifest: RunManifest {
                command: command.to_string(),
                deterministic: true,
                ..Default::default()
            },
        })
    }

    /// Write a file under the output root and record its hash.
    pub fn write(&mut self, rel: &str, contents: &str) -> Result<()> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        let hash = Sha256::digest(contents.as_bytes());
        self.manifest.outputs.push(OutputRecord {
            path: rel.to_string(),
            sha256: format!("{hash:x}"),
        });
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.manifest.outputs.sort_by(|a, b| a.path.cmp(&b.path));
        let text = serde_json::to_string_pretty(&self.manifest)?;
        fs::write(self.root.join("manifest.json"), text)?;
        Ok(())
    }
}
