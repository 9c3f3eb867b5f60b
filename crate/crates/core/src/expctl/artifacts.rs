//! Output directory handling: the per-directory lock, tracked file writes
//! and the run manifest.

use std::fs::{self, File, OpenOptions};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::csvio::emit_csv;
use crate::error::{HetsisError, Result};

pub const LOCK_FILE: &str = ".hetsis.lock";
pub const MANIFEST_FILE: &str = "manifest.json";

pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Exclusive claim on an output directory, released on drop.
pub(crate) struct DirLock {
    path: PathBuf,
    _file: File,
}

impl DirLock {
    pub(crate) fn acquire(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| HetsisError::io(dir, e))?;
        let path = dir.join(LOCK_FILE);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(file) => Ok(Self { path, _file: file }),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                Err(HetsisError::Locked(dir.to_path_buf()))
            }
            Err(e) => Err(HetsisError::io(&path, e)),
        }
    }
}

impl Drop for DirLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Path relative to the output directory, `/`-separated.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Manifest of one run. Contains no timestamps or host details, so equal
/// specs give byte-equal manifests.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunRecord {
    pub experiment: String,
    pub spec_hash: String,
    pub seed: u64,
    pub version: String,
    pub files: Vec<FileEntry>,
}

/// Writes files below a root directory and remembers what was written.
pub(crate) struct Outputs {
    root: PathBuf,
    written: Vec<String>,
}

impl Outputs {
    pub(crate) fn new(root: &Path) -> Self {
        Self {
            root: root.to_path_buf(),
            written: Vec::new(),
        }
    }

    fn prepare(&mut self, rel: &str) -> Result<PathBuf> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| HetsisError::io(parent, e))?;
        }
        self.written.push(rel.to_owned());
        Ok(path)
    }

    pub(crate) fn csv(&mut self, rel: &str, header: &[&str], columns: &[&[f64]]) -> Result<()> {
        let path = self.prepare(rel)?;
        emit_csv(&path, header, columns)
    }

    pub(crate) fn json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<()> {
        let path = self.prepare(rel)?;
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| HetsisError::Internal(format!("serializing {rel}: {e}")))?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| HetsisError::io(&path, e))
    }

    /// Hashes every written file and stores the manifest next to them.
    pub(crate) fn finish(mut self, experiment: &str, spec_hash: String, seed: u64) -> Result<RunRecord> {
        self.written.sort();
        self.written.dedup();
        let mut files = Vec::with_capacity(self.written.len());
        for rel in &self.written {
            let path = self.root.join(rel);
            let bytes = fs::read(&path).map_err(|e| HetsisError::io(&path, e))?;
            files.push(FileEntry {
                path: rel.clone(),
                sha256: sha256_hex(&bytes),
                bytes: bytes.len() as u64,
            });
        }
        let record = RunRecord {
            experiment: experiment.to_owned(),
            spec_hash,
            seed,
            version: env!("CARGO_PKG_VERSION").to_owned(),
            files,
        };
        let mut manifest = Outputs::new(&self.root);
        manifest.json(MANIFEST_FILE, &record)?;
        Ok(record)
    }
}
