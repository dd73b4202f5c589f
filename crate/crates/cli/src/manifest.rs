use chrono::{DateTime, Utc};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

#[derive(Debug, Serialize)]
pub struct OutputFile {
    pub path: PathBuf,
    pub bytes: u64,
    pub sha256: String,
}

impl OutputFile {
    pub fn hash(path: &Path) -> io::Result<Self> {
        let data = fs::read(path)?;
        Ok(OutputFile {
            path: path.to_path_buf(),
            bytes: data.len() as u64,
            sha256: hex::encode(Sha256::digest(&data)),
        })
    }
}

/// Audit record written next to every command's outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub args: Vec<String>,
    pub config: serde_json::Value,
    pub master_seed: Option<u64>,
    pub tool_version: String,
    pub started_at: DateTime<Utc>,
    pub finished_at: DateTime<Utc>,
    pub outputs: Vec<OutputFile>,
}

impl RunManifest {
    pub fn new(command: &str, config: serde_json::Value, master_seed: Option<u64>, started_at: DateTime<Utc>) -> Self {
        RunManifest {
            command: command.to_string(),
            args: std::env::args().collect(),
            config,
            master_seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            started_at,
            finished_at: started_at,
            outputs: Vec::new(),
        }
    }

    /// Hash `outputs` and write the manifest to `path`.
    pub fn finish(mut self, outputs: &[PathBuf], path: &Path) -> io::Result<()> {
        self.outputs = outputs.iter().map(|p| OutputFile::hash(p)).collect::<io::Result<_>>()?;
        self.finished_at = Utc::now();
        fs::write(path, serde_json::to_string_pretty(&self)? + "\n")
    }
}
