//! Per-run manifest: what ran, with which settings, and the hash of every
//! file it wrote.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct Artifact {
    /// Relative to the output directory.
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub seeds: Vec<u64>,
    pub artifacts: Vec<Artifact>,
    pub started_unix: u64,
    pub wall_clock_seconds: f64,
}

/// `<command>.manifest.json`, so commands sharing a directory keep their own.
pub fn manifest_name(command: &str) -> String {
    format!("{}.manifest.json", command.replace(' ', "-"))
}

/// Collects artifacts written under one output directory.
pub struct Recorder {
    out_dir: PathBuf,
    command: String,
    config: serde_json::Value,
    seeds: Vec<u64>,
    artifacts: Vec<Artifact>,
    started_unix: u64,
    start: Instant,
}

impl Recorder {
    pub fn new(out_dir: &Path, command: &str, config: serde_json::Value) -> Result<Self> {
        fs::create_dir_all(out_dir)
            .with_context(|| format!("creating output directory {}", out_dir.display()))?;
        Ok(Self {
            out_dir: out_dir.to_path_buf(),
            command: command.to_string(),
            config,
            seeds: Vec::new(),
            artifacts: Vec::new(),
            started_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            start: Instant::now(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    pub fn seed(&mut self, seed: u64) {
        if !self.seeds.contains(&seed) {
            self.seeds.push(seed);
        }
    }

    /// Hashes a file that has just been written to `self.path(name)`.
    pub fn record(&mut self, name: &str) -> Result<PathBuf> {
        let path = self.path(name);
        let bytes = fs::read(&path).with_context(|| format!("reading back {}", path.display()))?;
        self.artifacts.push(Artifact {
            path: name.to_string(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        });
        Ok(path)
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<PathBuf> {
        let path = self.path(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.record(name)
    }

    pub fn finish(self) -> Result<PathBuf> {
        let manifest = RunManifest {
            command: self.command,
            config: self.config,
            seeds: self.seeds,
            artifacts: self.artifacts,
            started_unix: self.started_unix,
            wall_clock_seconds: self.start.elapsed().as_secs_f64(),
        };
        let path = self.out_dir.join(manifest_name(&manifest.command));
        fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}
