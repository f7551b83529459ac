use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Where the coefficient database came from.
#[derive(Debug, Clone, Serialize)]
pub struct DatabaseRecord {
    pub origin: String,
    pub sha256: String,
}

impl DatabaseRecord {
    pub fn new(origin: String, text: &str) -> Self {
        Self {
            origin,
            sha256: sha256_hex(text.as_bytes()),
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub database: DatabaseRecord,
    pub parameters: Value,
    pub outputs: Vec<OutputRecord>,
    pub wall_time_s: f64,
}

#[derive(Debug, Serialize)]
pub struct OutputRecord {
    pub path: PathBuf,
    pub sha256: String,
}

/// Collects output files of one run.
#[derive(Debug, Default)]
pub struct Outputs {
    records: Vec<OutputRecord>,
}

impl Outputs {
    pub fn write(&mut self, path: &Path, contents: &str) -> Result<(), CliError> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
        fs::write(path, contents).map_err(|e| CliError::io(path, e))?;
        self.records.push(OutputRecord {
            path: path.to_path_buf(),
            sha256: sha256_hex(contents.as_bytes()),
        });
        Ok(())
    }

    pub fn finish(
        self,
        command: &str,
        database: DatabaseRecord,
        parameters: Value,
        primary: &Path,
        elapsed: Duration,
    ) -> Result<PathBuf, CliError> {
        let manifest = RunManifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_owned(),
            database,
            parameters,
            outputs: self.records,
            wall_time_s: elapsed.as_secs_f64(),
        };
        let path = sibling(primary, "manifest.json");
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}

/// `<path>.<suffix>`, e.g. `scan.csv` -> `scan.csv.manifest.json`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}
