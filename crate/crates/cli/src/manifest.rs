use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context as _, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileHash {
    pub path: PathBuf,
    pub sha256: Option<String>,
}

/// Everything needed to replay a run: the exact arguments, the resolved
/// flag values and hashes of every input and output file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub argv: Vec<String>,
    pub flags: serde_json::Value,
    pub seed: Option<u64>,
    pub jobs: usize,
    pub inputs: Vec<FileHash>,
    pub outputs: Vec<FileHash>,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(bytes)))
}

/// Files under `path` (or `path` itself), sorted, skipping `exclude`.
fn files_under(path: &Path, exclude: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    if path.is_dir() {
        let Ok(entries) = fs::read_dir(path) else {
            return out;
        };
        for e in entries.flatten() {
            out.extend(files_under(&e.path(), exclude));
        }
    } else if path.is_file() && path != exclude {
        out.push(path.to_owned());
    }
    out.sort();
    out
}

impl RunManifest {
    pub fn hash_inputs(paths: &[PathBuf]) -> Result<Vec<FileHash>> {
        paths
            .iter()
            .map(|p| {
                Ok(FileHash {
                    path: p.clone(),
                    sha256: Some(sha256_file(p)?),
                })
            })
            .collect()
    }

    /// Replaces planned outputs with the files actually written.
    pub fn record_outputs(&mut self, planned: &[PathBuf], manifest_path: &Path) -> Result<()> {
        let mut outputs = Vec::new();
        for p in planned {
            for f in files_under(p, manifest_path) {
                outputs.push(FileHash {
                    sha256: Some(sha256_file(&f)?),
                    path: f,
                });
            }
        }
        self.outputs = outputs;
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        let text = serde_json::to_string_pretty(self)? + "\n";
        fs::write(path, text).with_context(|| format!("writing manifest {}", path.display()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Ok(serde_json::from_str(&text)?)
    }
}
