//! CSV tables with a commented header block, and the run manifest.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

pub const MANIFEST_NAME: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileRecord {
    pub name: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub timestamp: String,
    pub config_sha256: String,
    pub seeds: Vec<u64>,
    pub config: serde_json::Value,
    /// Derived numerical parameters such as grid spacing and time step.
    pub derived: serde_json::Value,
    pub files: Vec<FileRecord>,
}

/// Output directory of one run. Every table goes through [`Self::write_csv`]
/// so that it is recorded in the manifest.
#[derive(Debug)]
pub struct OutputDir {
    dir: PathBuf,
    header: Vec<String>,
    files: Vec<FileRecord>,
}

impl OutputDir {
    /// `header` lines are written, prefixed with `# `, at the top of every CSV.
    pub fn create(dir: &Path, header: Vec<String>) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            header,
            files: Vec::new(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn files(&self) -> &[FileRecord] {
        &self.files
    }

    pub fn write_csv<I>(
        &mut self,
        name: &str,
        columns: &[&str],
        rows: I,
    ) -> Result<PathBuf, CliError>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let mut bytes = Vec::new();
        for line in &self.header {
            bytes.extend_from_slice(format!("# {line}\n").as_bytes());
        }
        {
            let mut w = csv::Writer::from_writer(&mut bytes);
            w.write_record(columns)?;
            for row in rows {
                w.write_record(&row)?;
            }
            w.flush()
                .map_err(|e| CliError::io(self.dir.join(name), e))?;
        }
        self.write_file(name, &bytes)
    }

    fn write_file(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.files.push(FileRecord {
            name: name.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len(),
        });
        Ok(path)
    }

    /// Writes `manifest.json` listing every file written so far.
    pub fn finish(self, mut manifest: RunManifest) -> Result<PathBuf, CliError> {
        manifest.files = self.files;
        let path = self.dir.join(MANIFEST_NAME);
        let text = serde_json::to_string_pretty(&manifest)?;
        std::fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}
