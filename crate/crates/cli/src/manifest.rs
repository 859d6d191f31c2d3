//! Run manifests: the resolved input, content hashes and every file written.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

pub const MANIFEST_NAME: &str = "manifest.toml";

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub timestamp: String,
    pub command: String,
    /// Full argument vector of the invocation.
    pub arguments: Vec<String>,
    pub outputs: Vec<String>,
    pub input_hashes: BTreeMap<String, String>,
    pub config_echo: toml::Table,
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

/// Collects outputs for one command and writes the manifest last.
pub struct Artifacts {
    dir: PathBuf,
    command: String,
    outputs: Vec<String>,
    inputs: BTreeMap<String, String>,
    echo: toml::Table,
}

impl Artifacts {
    pub fn new(dir: &Path, command: &str) -> Result<Self, CliError> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            command: command.to_string(),
            outputs: Vec::new(),
            inputs: BTreeMap::new(),
            echo: toml::Table::new(),
        })
    }

    pub fn echo(&mut self, table: toml::Table) {
        self.echo = table;
    }

    pub fn input(&mut self, path: &Path) -> Result<(), CliError> {
        let digest = sha256_file(path)?;
        self.inputs.insert(path.display().to_string(), digest);
        Ok(())
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Writes `bytes` to `name` inside the output directory and records it.
    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        fs::write(&path, bytes)?;
        self.outputs.push(name.to_string());
        Ok(path)
    }

    pub fn finish(self) -> Result<PathBuf, CliError> {
        let manifest = RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            command: self.command,
            arguments: std::env::args().collect(),
            outputs: self.outputs,
            input_hashes: self.inputs,
            config_echo: self.echo,
        };
        let text = toml::to_string(&manifest).map_err(|e| CliError::Numerical(format!("manifest: {e}")))?;
        let path = self.dir.join(MANIFEST_NAME);
        fs::write(&path, text)?;
        Ok(path)
    }
}
