//! Run manifests: what was run, with which settings, and what it wrote.

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub seed: u64,
    pub version: String,
    pub outputs: Vec<PathBuf>,
    pub started_unix_seconds: u64,
    pub elapsed_seconds: f64,
    /// Free-form notes (estimator descriptions, burn-in choices, ...).
    pub notes: Vec<(String, String)>,
}

/// Collects outputs during a command and writes the manifest at the end.
pub struct ManifestBuilder {
    command: String,
    config: serde_json::Value,
    seed: u64,
    outputs: Vec<PathBuf>,
    notes: Vec<(String, String)>,
    started: SystemTime,
    clock: Instant,
}

impl ManifestBuilder {
    pub fn new<C: Serialize>(command: &str, config: &C, seed: u64) -> Result<Self> {
        Ok(Self {
            command: command.to_string(),
            config: serde_json::to_value(config)?,
            seed,
            outputs: Vec::new(),
            notes: Vec::new(),
            started: SystemTime::now(),
            clock: Instant::now(),
        })
    }

    pub fn output(&mut self, path: impl Into<PathBuf>) {
        self.outputs.push(path.into());
    }

    pub fn note(&mut self, key: &str, value: impl Into<String>) {
        self.notes.push((key.to_string(), value.into()));
    }

    /// Writes `manifest.json` into `dir`.
    pub fn write(self, dir: &Path) -> Result<RunManifest> {
        std::fs::create_dir_all(dir)?;
        self.write_at(&dir.join(MANIFEST_FILE))
    }

    /// Writes the manifest to `path`, after checking that every listed
    /// output exists.
    pub fn write_at(self, path: &Path) -> Result<RunManifest> {
        if let Some(missing) = self.outputs.iter().find(|p| !p.exists()) {
            return Err(Error::data(format!(
                "output {} was not written",
                missing.display()
            )));
        }
        let manifest = RunManifest {
            command: self.command,
            config: self.config,
            seed: self.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            outputs: self.outputs,
            started_unix_seconds: self
                .started
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            elapsed_seconds: self.clock.elapsed().as_secs_f64(),
            notes: self.notes,
        };
        std::fs::write(path, serde_json::to_string_pretty(&manifest)?)?;
        Ok(manifest)
    }
}
