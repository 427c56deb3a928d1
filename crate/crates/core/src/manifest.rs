//! Provenance records written next to every output artifact.

use std::fs::File;
use std::io::{self, Read};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;

/// Size and content hash of one input file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub path: PathBuf,
    pub bytes: u64,
    pub sha256: String,
}

impl Fingerprint {
    pub fn of(path: &Path) -> Result<Fingerprint> {
        Ok(Fingerprint {
            path: path.to_path_buf(),
            bytes: std::fs::metadata(path)?.len(),
            sha256: sha256_reader(File::open(path)?)?,
        })
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: Vec<String>,
    pub config_path: Option<PathBuf>,
    /// Hash of the resolved configuration, after command-line overrides.
    pub config_hash: Option<String>,
    pub inputs: Vec<Fingerprint>,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub outputs: Vec<PathBuf>,
    pub started: String,
    pub finished: String,
}

impl RunManifest {
    /// Start a manifest for `command`; call [`RunManifest::finish`] once
    /// every output is written.
    pub fn begin(command: Vec<String>) -> RunManifest {
        RunManifest {
            command,
            config_path: None,
            config_hash: None,
            inputs: Vec::new(),
            seed: None,
            tool_version: env!("CARGO_PKG_VERSION").to_owned(),
            outputs: Vec::new(),
            started: now(),
            finished: String::new(),
        }
    }

    pub fn with_config(mut self, path: &Path, canonical: &str) -> Self {
        self.config_path = Some(path.to_path_buf());
        self.config_hash = Some(sha256_hex(canonical.as_bytes()));
        self
    }

    pub fn add_input(&mut self, path: &Path) -> Result<()> {
        self.inputs.push(Fingerprint::of(path)?);
        Ok(())
    }

    pub fn finish(&mut self, outputs: Vec<PathBuf>) {
        self.outputs = outputs;
        self.finished = now();
    }

    /// Manifest with the timestamps blanked, for determinism comparisons.
    pub fn without_timestamps(&self) -> RunManifest {
        RunManifest {
            started: String::new(),
            finished: String::new(),
            ..self.clone()
        }
    }
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

/// Hash of a byte stream, for callers that already hold a reader.
pub fn sha256_reader<R: Read>(mut reader: R) -> io::Result<String> {
    let mut hasher = Sha256::new();
    io::copy(&mut reader, &mut hasher)?;
    Ok(hex::encode(hasher.finalize()))
}
