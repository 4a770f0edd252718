//! Run manifest: what was run, with which configuration, on which bytes.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Serialize)]
pub struct FileDigest {
    pub path: PathBuf,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub core_version: &'static str,
    pub command: String,
    pub seed: u64,
    pub threads: usize,
    pub config_sha256: String,
    pub config: RunConfig,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    /// Re-runs this command with the saved configuration.
    pub rerun: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub fn digest(path: &Path) -> CliResult<FileDigest> {
    let bytes = fs::read(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    Ok(FileDigest {
        path: path.to_path_buf(),
        sha256: sha256_hex(&bytes),
        bytes: bytes.len() as u64,
    })
}

/// Hash of the configuration's canonical JSON form.
pub fn config_hash(cfg: &RunConfig) -> CliResult<String> {
    let text = serde_json::to_string(cfg).map_err(|e| CliError::usage(e.to_string()))?;
    Ok(sha256_hex(text.as_bytes()))
}

/// Writes `config.toml` and `manifest.json` next to the outputs.
pub fn write(
    cfg: &RunConfig,
    command: &str,
    inputs: &[PathBuf],
    outputs: &[PathBuf],
) -> CliResult<()> {
    let dir = &cfg.paths.out;
    let config_path = dir.join("config.toml");
    fs::write(&config_path, cfg.to_toml()?)
        .map_err(|e| CliError::data(format!("{}: {e}", config_path.display())))?;

    let mut inputs: Vec<PathBuf> = inputs.to_vec();
    inputs.sort();
    inputs.dedup();
    let manifest = Manifest {
        tool: "selfdecl",
        version: env!("CARGO_PKG_VERSION"),
        core_version: selfdecl::VERSION,
        command: command.to_string(),
        seed: cfg.seed,
        threads: rayon::current_num_threads(),
        config_sha256: config_hash(cfg)?,
        config: cfg.clone(),
        inputs: inputs.iter().map(|p| digest(p)).collect::<CliResult<_>>()?,
        outputs: outputs
            .iter()
            .map(|p| digest(p))
            .collect::<CliResult<_>>()?,
        rerun: format!("selfdecl {command} --config {}", config_path.display()),
    };
    let path = dir.join("manifest.json");
    let text = selfdecl::persist::to_pretty_json(&manifest)?;
    fs::write(&path, text).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}
