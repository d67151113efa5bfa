use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::ExperimentConfig;
use crate::error::{Error, Result};

/// Files produced by a suite, kept in memory until the run succeeds.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outputs {
    files: BTreeMap<String, String>,
}

impl Outputs {
    pub fn add(&mut self, name: impl Into<String>, contents: impl Into<String>) {
        self.files.insert(name.into(), contents.into());
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.files.get(name).map(String::as_str)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.keys().map(String::as_str)
    }

    pub fn checksums(&self) -> BTreeMap<String, String> {
        self.files.iter().map(|(k, v)| (k.clone(), sha256_hex(v.as_bytes()))).collect()
    }

    /// Writes every file into `dir` (created if needed) and returns the paths.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut paths = Vec::new();
        for (name, contents) in &self.files {
            let p = dir.join(name);
            fs::write(&p, contents)?;
            paths.push(p);
        }
        Ok(paths)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Record of one run. Identical config, seed and version reproduce every
/// listed output byte for byte; only the timestamp differs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub experiment: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub version: String,
    /// SHA-256 of each output file.
    pub checksums: BTreeMap<String, String>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

impl RunManifest {
    pub fn new(config: &ExperimentConfig, outputs: &Outputs) -> Self {
        let timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        Self {
            experiment: config.experiment.name().to_string(),
            seed: config.seed,
            config: config.clone(),
            timestamp,
            version: env!("CARGO_PKG_VERSION").to_string(),
            checksums: outputs.checksums(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Recomputes the checksums of the files in `dir`; returns the names that differ or are missing.
    pub fn verify(&self, dir: &Path) -> Result<Vec<String>> {
        let mut bad = Vec::new();
        for (name, sum) in &self.checksums {
            match fs::read(dir.join(name)) {
                Ok(bytes) if sha256_hex(&bytes) == *sum => {}
                _ => bad.push(name.clone()),
            }
        }
        Ok(bad)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
