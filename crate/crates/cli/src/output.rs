use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Serialize)]
pub struct ArtifactEntry {
    pub file: String,
    pub sha256: String,
}

#[derive(Serialize)]
pub struct Manifest<'a> {
    pub schema_version: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub config_hash: &'a str,
    pub config: &'a serde_json::Value,
    pub seed: Option<u64>,
    pub artifacts: Vec<ArtifactEntry>,
}

/// Collects the artifacts of one run and writes them with the manifest.
pub struct RunOutput {
    dir: PathBuf,
    command: String,
    config: serde_json::Value,
    config_hash: String,
    seed: Option<u64>,
    artifacts: Vec<ArtifactEntry>,
}

impl RunOutput {
    pub fn new(dir: &Path, command: &str, config: serde_json::Value, seed: Option<u64>) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        let canonical = serde_json::to_vec(&config).expect("config serializes");
        Ok(RunOutput {
            dir: dir.to_path_buf(),
            command: command.to_string(),
            config_hash: sha256_hex(&canonical),
            config,
            seed,
            artifacts: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.artifacts.push(ArtifactEntry {
            file: name.to_string(),
            sha256: sha256_hex(bytes),
        });
        Ok(())
    }

    /// Writes `{"config_hash": …, "command": …, "report": value}`.
    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        #[derive(Serialize)]
        struct Wrapped<'a, T> {
            config_hash: &'a str,
            command: &'a str,
            report: &'a T,
        }
        let doc = Wrapped {
            config_hash: &self.config_hash,
            command: &self.command,
            report: value,
        };
        let mut bytes = serde_json::to_vec_pretty(&doc).map_err(|e| CliError::Io(e.to_string()))?;
        bytes.push(b'\n');
        self.write(name, &bytes)
    }

    /// Writes CSV produced by `fill`, headed by a `# config_hash=` comment.
    pub fn csv<F>(&mut self, name: &str, fill: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut Vec<u8>) -> nls_cascade::Result<()>,
    {
        let mut bytes = format!("# config_hash={}\n", self.config_hash).into_bytes();
        fill(&mut bytes)?;
        self.write(name, &bytes)
    }

    pub fn finish(self) -> Result<PathBuf, CliError> {
        let manifest = Manifest {
            schema_version: MANIFEST_SCHEMA_VERSION,
            tool: "nlslab",
            version: env!("CARGO_PKG_VERSION"),
            command: &self.command,
            config_hash: &self.config_hash,
            config: &self.config,
            seed: self.seed,
            artifacts: self.artifacts,
        };
        let mut bytes = serde_json::to_vec_pretty(&manifest).map_err(|e| CliError::Io(e.to_string()))?;
        bytes.push(b'\n');
        let path = self.dir.join("manifest.json");
        fs::write(&path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Ok(path)
    }
}
