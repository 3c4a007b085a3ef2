//! Deterministic result files: CSV tables, JSON reports, and a run
//! manifest with content fingerprints.
//!
//! All files are written atomically (temp file + rename) and all floats
//! are formatted with Rust's shortest round-trip representation, so two
//! runs with the same config produce byte-identical artifacts.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Environment variable overriding the configured output directory.
pub const OUT_DIR_ENV: &str = "SCALARLAB_OUT";

/// A simple in-memory CSV table.
pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(columns: Vec<S>) -> Self {
        CsvTable {
            header: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) -> Result<()> {
        if row.len() != self.header.len() {
            return Err(Error::Shape(format!(
                "row has {} cells for {} columns",
                row.len(),
                self.header.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.header.join(","));
        for row in &self.rows {
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }
}

/// Shortest round-trip decimal form of a float (deterministic).
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// Write `content` to `dir/name` atomically. Returns the path and the
/// SHA-256 fingerprint of the bytes.
pub fn write_atomic(dir: &Path, name: &str, content: &str) -> Result<(PathBuf, String)> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp"));
    std::fs::write(&tmp, content)?;
    std::fs::rename(&tmp, &path)?;
    Ok((path, sha256_hex(content.as_bytes())))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// One entry of the run manifest.
#[derive(Debug, Clone, Serialize)]
pub struct ArtifactRecord {
    pub name: String,
    pub sha256: String,
}

/// Manifest describing a complete run: the config that produced it and
/// fingerprints of every artifact.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: crate::config::RunConfig,
    pub artifacts: Vec<ArtifactRecord>,
}

impl RunManifest {
    pub fn new(command: &str, config: &crate::config::RunConfig) -> Self {
        RunManifest {
            tool: "scalarlab".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config: config.clone(),
            artifacts: Vec::new(),
        }
    }

    pub fn record(&mut self, name: &str, sha256: String) {
        self.artifacts.push(ArtifactRecord {
            name: name.into(),
            sha256,
        });
    }

    /// Serialize and write the manifest itself (sorted artifact list for
    /// stable bytes).
    pub fn write(mut self, dir: &Path) -> Result<PathBuf> {
        self.artifacts.sort_by(|a, b| a.name.cmp(&b.name));
        let text = serde_json::to_string_pretty(&self)
            .map_err(|e| Error::Consistency(format!("manifest serialization failed: {e}")))?;
        let (path, _) = write_atomic(dir, "manifest.json", &text)?;
        Ok(path)
    }
}

/// Resolve the output directory: environment override, else config.
pub fn resolve_out_dir(cfg: &crate::config::RunConfig) -> PathBuf {
    match std::env::var(OUT_DIR_ENV) {
        Ok(v) if !v.is_empty() => PathBuf::from(v),
        _ => PathBuf::from(&cfg.output.directory),
    }
}
