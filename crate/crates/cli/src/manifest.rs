//! Output files and the JSON manifest that lists them.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::CliResult;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Serialize)]
pub struct Artifact {
    pub file: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Versions {
    pub cli: &'static str,
    pub core: &'static str,
    pub cutoff_table: u32,
}

/// Everything needed to rerun a command and check its outputs. Contains no
/// timestamps, so identical runs produce identical manifests.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: Vec<String>,
    pub versions: Versions,
    pub workers: Option<usize>,
    pub config: Value,
    pub seeds: BTreeMap<String, u64>,
    pub cutoffs: BTreeMap<String, Value>,
    pub outputs: Vec<Artifact>,
}

/// Collects the files a command writes into its output directory.
pub struct OutputDir {
    dir: PathBuf,
    artifacts: Vec<Artifact>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> CliResult<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            artifacts: Vec::new(),
        })
    }

    pub fn write(&mut self, file: &str, contents: &[u8]) -> CliResult<PathBuf> {
        let path = self.dir.join(file);
        fs::write(&path, contents)?;
        self.artifacts.retain(|a| a.file != file);
        self.artifacts.push(Artifact {
            file: file.to_string(),
            bytes: contents.len(),
            sha256: hex::encode(Sha256::digest(contents)),
        });
        Ok(path)
    }

    pub fn finish(self, mut manifest: RunManifest) -> CliResult<PathBuf> {
        manifest.outputs = self.artifacts;
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        text.push('\n');
        let path = self.dir.join(MANIFEST_FILE);
        fs::write(&path, text)?;
        Ok(path)
    }
}
