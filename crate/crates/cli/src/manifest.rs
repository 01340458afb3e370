//! Run manifest: config hash, artifact version, per-file checksums, timing.
//! Reruns with the same config and seed reproduce byte-identical CSV files;
//! the manifest records the digests that let a reviewer verify that.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::CliError;

#[derive(Debug, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub artifact_version: String,
    pub files: Vec<FileDigest>,
    pub wall_time_secs: f64,
}

pub fn config_hash(config: &ExperimentConfig) -> Result<String, CliError> {
    let canonical =
        serde_json::to_vec(config).map_err(|e| CliError::Config(format!("hash config: {e}")))?;
    Ok(hex_digest(&canonical))
}

fn hex_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let out = hasher.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn build_manifest(
    config: &ExperimentConfig,
    out_dir: &Path,
    files: &[PathBuf],
    wall_time_secs: f64,
) -> Result<RunManifest, CliError> {
    let mut digests = Vec::with_capacity(files.len());
    for file in files {
        let contents = fs::read(file)?;
        let rel = file
            .strip_prefix(out_dir)
            .unwrap_or(file)
            .to_string_lossy()
            .into_owned();
        digests.push(FileDigest {
            path: rel,
            sha256: hex_digest(&contents),
            bytes: contents.len() as u64,
        });
    }
    Ok(RunManifest {
        config_hash: config_hash(config)?,
        artifact_version: env!("CARGO_PKG_VERSION").to_string(),
        files: digests,
        wall_time_secs,
    })
}

pub fn write_manifest(manifest: &RunManifest, out_dir: &Path) -> Result<PathBuf, CliError> {
    let path = out_dir.join("manifest.json");
    let mut text = serde_json::to_string_pretty(manifest)
        .map_err(|e| CliError::Config(format!("serialize manifest: {e}")))?;
    text.push('\n');
    fs::write(&path, text)?;
    Ok(path)
}
