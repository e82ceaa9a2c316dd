use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub args: Vec<String>,
    pub config_paths: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub version: String,
    pub input_hashes: BTreeMap<String, String>,
    pub started_at: String,
    pub finished_at: String,
    pub outputs: Vec<String>,
    pub exit_code: i32,
}

/// Bookkeeping for one invocation: hashed inputs, written outputs.
pub struct Run {
    pub out_dir: PathBuf,
    pub seed: Option<u64>,
    command: String,
    args: Vec<String>,
    started_at: String,
    config_paths: BTreeMap<String, String>,
    input_hashes: BTreeMap<String, String>,
    outputs: Vec<String>,
}

impl Run {
    pub fn new(command: &str, out_dir: PathBuf, seed: Option<u64>) -> Self {
        Run {
            out_dir,
            seed,
            command: command.to_string(),
            args: std::env::args().skip(1).collect(),
            started_at: chrono::Utc::now().to_rfc3339(),
            config_paths: BTreeMap::new(),
            input_hashes: BTreeMap::new(),
            outputs: Vec::new(),
        }
    }

    /// Read an input file, recording its SHA-256 (and its role if it is a config).
    pub fn read(&mut self, path: &Path, config_role: Option<&str>) -> CliResult<String> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let key = path.display().to_string();
        self.input_hashes.insert(key.clone(), hex::encode(Sha256::digest(text.as_bytes())));
        if let Some(role) = config_role {
            self.config_paths.insert(role.to_string(), key);
        }
        Ok(text)
    }

    pub fn write<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<PathBuf> {
        fs::create_dir_all(&self.out_dir).map_err(|source| CliError::Io {
            path: self.out_dir.clone(),
            source,
        })?;
        let path = self.out_dir.join(name);
        let mut body = serde_json::to_string_pretty(value).map_err(|source| CliError::Json {
            path: path.clone(),
            source,
        })?;
        body.push('\n');
        fs::write(&path, body).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        self.outputs.push(path.display().to_string());
        Ok(path)
    }

    pub fn finish(self, exit_code: i32) -> CliResult<()> {
        let manifest = RunManifest {
            command: self.command,
            args: self.args,
            config_paths: self.config_paths,
            seed: self.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            input_hashes: self.input_hashes,
            started_at: self.started_at,
            finished_at: chrono::Utc::now().to_rfc3339(),
            outputs: self.outputs,
            exit_code,
        };
        fs::create_dir_all(&self.out_dir).map_err(|source| CliError::Io {
            path: self.out_dir.clone(),
            source,
        })?;
        let path = self.out_dir.join("manifest.json");
        let body = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        fs::write(&path, body + "\n").map_err(|source| CliError::Io { path, source })
    }
}
