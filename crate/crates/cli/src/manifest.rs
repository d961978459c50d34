//! Run manifests: every command writes a JSON record echoing its inputs and
//! listing each produced file with a content digest, so a run can be audited
//! and reproduced byte for byte.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Serialize)]
pub struct OutputRecord {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Serialize)]
pub struct RunManifest<P: Serialize> {
    pub command: String,
    pub code_version: String,
    pub started: String,
    pub finished: String,
    pub params: P,
    pub outputs: Vec<OutputRecord>,
}

/// Collects outputs for one run directory and finalizes the manifest.
pub struct ManifestBuilder {
    out_dir: PathBuf,
    command: String,
    started: String,
    outputs: Vec<OutputRecord>,
}

impl ManifestBuilder {
    pub fn new(out_dir: &Path, command: &str) -> Result<Self> {
        fs::create_dir_all(out_dir)
            .with_context(|| format!("creating output directory {}", out_dir.display()))?;
        Ok(Self {
            out_dir: out_dir.to_path_buf(),
            command: command.to_string(),
            started: chrono::Utc::now().to_rfc3339(),
            outputs: Vec::new(),
        })
    }

    /// Writes one output file and records its digest.
    pub fn write_file(&mut self, name: &str, contents: &[u8]) -> Result<PathBuf> {
        let path = self.out_dir.join(name);
        let mut file =
            fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        file.write_all(contents)
            .with_context(|| format!("writing {}", path.display()))?;
        let mut hasher = Sha256::new();
        hasher.update(contents);
        self.outputs.push(OutputRecord {
            path: name.to_string(),
            sha256: format!("{:x}", hasher.finalize()),
            bytes: contents.len() as u64,
        });
        Ok(path)
    }

    /// Writes manifest.json with the echoed parameters.
    pub fn finish<P: Serialize>(self, params: P) -> Result<PathBuf> {
        let manifest = RunManifest {
            command: self.command,
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            started: self.started,
            finished: chrono::Utc::now().to_rfc3339(),
            params,
            outputs: self.outputs,
        };
        let path = self.out_dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}
